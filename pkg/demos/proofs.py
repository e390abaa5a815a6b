"""Checking Hilbert-style proof scripts.

Run with ``python3 demos/proofs.py``.
"""

from __future__ import annotations

from pathlib import Path

from oplogic.proof import check_proof, format_proof, load_proof, parse_proof

CORPUS = Path(__file__).resolve().parents[1] / "corpus"

p = load_proof(CORPUS / "identity_refl.prf")
print(format_proof(p))
print("->", check_proof(p).summary())

# MP i j cites the antecedent first and the implication second; reversed is refused.
bad = parse_proof("""
premises:
  P^<e1>(c^e1)
  P(c) -> Q^<e1>(c)
1. P(c) ; PREM 1
2. P(c) -> Q(c) ; PREM 2
3. Q(c) ; MP 2 1
""")
v = check_proof(bad)
print("->", v.summary())

# Generalizing over a variable that occurs free in a premise is refused.
v = check_proof(parse_proof("premises:\n  P^<e1>(x^e1)\n1. P(x) ; PREM 1\n2. forall x^e1 . P(x) ; GEN 1 x\n"))
print("->", v.summary())
