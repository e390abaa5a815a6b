"""Syntax of the logic: types, terms, formulas, parsing and printing."""

from .parser import (
    format_formula, format_term, format_type, parse, parse_formula, parse_term,
    parse_type, read_formulas,
)
from .syntax import (
    BINDERS, CONST, E1, E2, PRIMITIVE, VAR, And, Atom, BaseType, Const, Eq,
    Exists, Forall, Formula, Iff, Implies, Not, Or, Term, TupleType, TypeExpr,
    Var, alpha_equal, alpha_key, constants_of, desugar, free_variables,
    identity_expansion, is_closed, is_free_for, is_opaque, is_primitive,
    leaves, opacity_violation, rename_bound, substitute, tup, types_of,
    universal_closure,
)
