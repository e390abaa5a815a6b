"""Finite semantics: frames, interpretations, satisfaction and bounded validity."""

from .fileio import (
    FrameDocument, decode_element, document_data, dump_frame_document,
    encode_element, load_frame_document, parse_frame_document,
)
from .frames import (
    KINDS, Frame, FrameSpec, PseudoDiagonal, apply_perm, build_frame,
    make_frame, pseudo_diagonal, type_closure,
)
from .semantics import (
    Counterexample, Interpretation, InvarianceReport, ValidityReport,
    bounded_validity, compile_formula, is_true, permutation_invariance_check,
    permutation_invariance_report, refuting_valuation, satisfies, valuations,
    veiled_extension,
)
