"""Finite frames: standard versus symmetric, and what identity means in each.

Run with ``python3 demos/models.py``.
"""

from __future__ import annotations

from oplogic.lang import E1, Const, Var, desugar, parse_formula, tup
from oplogic.model import Interpretation, is_true, make_frame, pseudo_diagonal, satisfies, veiled_extension
from oplogic.qset import format_qset

P1 = tup(E1)
P = Const("P", P1)
X, Y = Var("X", P1), Var("Y", P1)
one, two = frozenset({(1,)}), frozenset({(2,)})
leibniz = desugar(parse_formula("X^<e1> = Y^<e1>"))

for kind in ("standard", "symmetric"):
    frame = make_frame(2, 1, [P1, tup(P1)], kind)
    print(f"{kind:9}: |<e1>| = {len(frame.domain(P1))}, |<<e1>>| = {len(frame.domain(tup(P1)))}")
    i = Interpretation(frame)
    print("           {1} and {2} pseudo-diagonal pair:", (one, two) in pseudo_diagonal(frame, P1))
    print("           Leibniz identity {1} = {2}:", satisfies(i, {X: one, Y: two}, leibniz))

frame = make_frame(3, 1, [P1])
i = Interpretation(frame, {P: frozenset({(1,), (3,)})})
print("exists x P(x):", is_true(i, parse_formula("exists x^e1 . P^<e1>(x)")))
print("forall x P(x):", is_true(i, parse_formula("forall x^e1 . P^<e1>(x)")))
print("veiled extension of P:", format_qset(veiled_extension(i, P)))
