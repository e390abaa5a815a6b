"""Parsing, typing and desugaring formulas of the typed language.

Run with ``python3 demos/language.py``.
"""

from __future__ import annotations

from oplogic.errors import IdentityError
from oplogic.lang import (
    desugar, format_formula, free_variables, is_opaque, opacity_violation, parse_formula,
    parse_type, universal_closure,
)

f = parse_formula("forall x^e1 . P^<e1>(x) -> exists y^e1 . R^<e1,e1>(x, y) & a^e2 = b^e2")
print("parsed   :", format_formula(f))
print("desugared:", format_formula(desugar(f)))

g = parse_formula("R^<e1,e1>(x^e1, y^e1)")
print("free vars:", sorted(map(str, free_variables(g))))
print("closure  :", format_formula(universal_closure(g)))

# identity is simply not expressible between e1 terms
try:
    parse_formula("x^e1 = y^e1")
except IdentityError as e:
    print("rejected :", e)

for text in ["<e1>", "<<e1>,e1>", "<e1,e2>"]:
    t = parse_type(text)
    print(f"{text:10} opaque={is_opaque(t)}", opacity_violation(t) or "")
