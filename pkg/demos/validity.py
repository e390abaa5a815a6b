"""Bounded validity search and counterexample files.

Run with ``python3 demos/validity.py``.
"""

from __future__ import annotations

from pathlib import Path

from oplogic.lang import format_formula, parse_formula
from oplogic.model import FrameDocument, bounded_validity, dump_frame_document
from oplogic.proof import load_proof

CORPUS = Path(__file__).resolve().parents[1] / "corpus"

f = parse_formula("forall x^e1 . P^<e1>(x)")
r = bounded_validity(f, max_nm=2, max_M=1, max_depth=1)
print(format_formula(f), "->", r.verdict)
ce = r.counterexample
print(dump_frame_document(FrameDocument(ce.frame, ce.denotation, ce.valuation, f)))

proof = load_proof(CORPUS / "forall_exists.prf")
g = proof.lines[-1].formula
for lo in (1, 0):
    r = bounded_validity(g, max_nm=3, max_M=2, min_nm=lo)
    print(f"{format_formula(g)}  [n_m from {lo}] -> {r.verdict}, "
          f"{r.frames_checked} frames, {r.interpretations_checked} interpretations")
