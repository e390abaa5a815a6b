from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from oplogic.errors import CaptureError, ClassificationError, IdentityError, ParseError, TypingError
from oplogic.generators import CONSTANT_POOL, random_formula, random_type
from oplogic.lang import (
    E1, E2, And, Atom, Const, Eq, Exists, Forall, Iff, Implies, Not, Or, Var,
    alpha_equal, desugar, format_formula, free_variables, identity_expansion,
    is_closed, is_opaque, is_primitive, opacity_violation, parse_formula,
    parse_term, parse_type, read_formulas, substitute, tup, universal_closure,
)
from oplogic.lang.parser import parse_declaration
from oplogic.lang.syntax import contains_eq, fresh_name, rename_bound

P1 = tup(E1)


def test_type_parsing_and_printing():
    t = parse_type("< e1 , <e1,e2> >")
    assert t == tup(E1, tup(E1, E2))
    assert str(t) == "<e1,<e1,e2>>"
    assert t.depth == 2 and t.arity == 2


@pytest.mark.parametrize("text", ["<>", "<e1", "e3", "<e1,>"])
def test_bad_types(text):
    with pytest.raises(ParseError):
        parse_type(text)


def test_opacity():
    assert is_opaque(parse_type("<e1,<e1>>"))
    assert opacity_violation(parse_type("<e1,e2>")) == "component 2 has leaf e2"
    assert opacity_violation(parse_type("<<e1,e2>,e1>")) == "component 1 has leaf e2"
    with pytest.raises(ClassificationError):
        opacity_violation(E1)


def test_naming_convention_and_annotation_inference():
    f = parse_formula("P^<e1>(x^e1) -> P(x)")
    head = f.left.head
    assert head == Const("P", P1)
    assert f.right.args[0] == Var("x", E1)
    assert free_variables(f) == {Var("x", E1)}


def test_declarations_override_convention():
    decls = {"x": parse_declaration("@const x^e1")}
    f = parse_formula("P^<e1>(x)", decls)
    assert f.args[0] == Const("x", E1)


def test_missing_annotation_is_a_typing_error():
    with pytest.raises(TypingError):
        parse_formula("P^<e1>(y)")


def test_quantifier_needs_annotation():
    with pytest.raises(ParseError):
        parse_formula("forall x . P^<e1>(x)")


def test_identity_at_e1_rejected_with_position():
    with pytest.raises(IdentityError) as exc:
        parse_formula("x^e1 = y^e1")
    assert (exc.value.line, exc.value.column) == (1, 6)


def test_ill_typed_application_rejected():
    # a predicate variable of type <e1> cannot be bound by an <e1>-typed quantifier and applied as an e1
    with pytest.raises(TypingError):
        parse_formula("forall X^<e1>. P^<e1>(X)")
    f = parse_formula("forall X^e1 . P^<e1>(X)")
    assert isinstance(f, Forall) and f.var == Var("X", E1)


def test_precedence_and_associativity():
    f = parse_formula("!A^<e2>(a^e2) & B^<e2>(a) | C^<e2>(a) -> D^<e2>(a) -> A(a) <-> B(a)")
    assert isinstance(f, Iff)
    assert isinstance(f.left, Implies) and isinstance(f.left.right, Implies)
    assert isinstance(f.left.left, Or) and isinstance(f.left.left.left, And)
    assert isinstance(f.left.left.left.left, Not)


def test_quantifier_scope_extends_right():
    f = parse_formula("forall x^e1 . P^<e1>(x) -> P(x)")
    assert isinstance(f, Forall) and isinstance(f.body, Implies)


def test_unicode_aliases():
    f = parse_formula("∀x^e1 . ¬P^<e1>(x) → ∃y^e1 . P(y)")
    g = parse_formula("forall x^e1 . !P^<e1>(x) -> exists y^e1 . P(y)")
    assert f == g


def test_parse_error_positions():
    with pytest.raises(ParseError) as exc:
        parse_formula("P^<e1>(x^e1) -> ")
    assert exc.value.line == 1 and exc.value.column is not None


def test_read_formulas_carries_declarations():
    text = "# comment\n@const x^e1\nP^<e1>(x)\n\nQ^<e1>(x) # trailing\n"
    out = read_formulas(text)
    assert [n for n, _ in out] == [3, 5]
    assert out[1][1].args[0] == Const("x", E1)


def test_parse_term():
    assert parse_term("c^<e1,e2>") == Const("c", tup(E1, E2))


def test_substitution_and_capture():
    f = parse_formula("forall y^e1 . R^<e1,e1>(x^e1, y)")
    x, y = Var("x", E1), Var("y", E1)
    with pytest.raises(CaptureError):
        substitute(f, x, y)
    g = substitute(f, x, y, mode="rename")
    assert free_variables(g) == {y}
    assert substitute(f, x, Const("c", E1)) == parse_formula("forall y^e1 . R^<e1,e1>(c^e1, y)")


def test_substitution_respects_bound_occurrences():
    f = parse_formula("P^<e1>(x^e1) & forall x^e1 . P(x)")
    g = substitute(f, Var("x", E1), Const("c", E1))
    assert g == parse_formula("P^<e1>(c^e1) & forall x^e1 . P(x)")


def test_alpha_equivalence():
    f = parse_formula("forall x^e1 . P^<e1>(x)")
    g = parse_formula("forall z^e1 . P^<e1>(z)")
    h = parse_formula("forall z^e2 . S^<e2>(z)")
    assert alpha_equal(f, g) and not alpha_equal(f, h)
    assert alpha_equal(f, rename_bound(f))


def test_identity_expansion_is_leibniz():
    u, v = Var("u", E2), Var("v", E2)
    e = identity_expansion(u, v)
    assert isinstance(e, Forall) and e.var.type == tup(E2)
    assert alpha_equal(desugar(Eq(u, v)), desugar(e))


def test_desugar_yields_primitive_formula():
    f = parse_formula("exists x^e1 . P^<e1>(x) & (Q^<e1>(x) | a^e2 = b^e2) <-> P(x)")
    g = desugar(f)
    assert is_primitive(g) and not contains_eq(g)
    assert not is_primitive(f)


def test_universal_closure():
    f = parse_formula("R^<e1,e1>(y^e1, x^e1)")
    c = universal_closure(f)
    assert is_closed(c)
    assert c == Forall(Var("x", E1), Forall(Var("y", E1), f))


def test_fresh_name():
    assert fresh_name({"X1", "X2"}) == "X3"


def test_eq_requires_same_type():
    with pytest.raises(TypingError):
        Eq(Var("u", E2), Var("U", P1))


def test_binder_must_be_variable():
    with pytest.raises(TypingError):
        Forall(Const("c", E1), Atom(Const("P", P1), (Const("c", E1),)))


# -- properties ------------------------------------------------------------------------

@given(st.integers(0, 10 ** 6))
@settings(max_examples=150)
def test_print_parse_round_trip(seed):
    f = random_formula(random.Random(seed), constants=CONSTANT_POOL, depth=4, p_eq=0.3)
    assert parse_formula(format_formula(f)) == f


@given(st.integers(0, 10 ** 6))
@settings(max_examples=150)
def test_type_round_trip_and_opacity_oracle(seed):
    t = random_type(random.Random(seed))
    assert parse_type(str(t)) == t
    if not isinstance(t, type(E1)):
        assert is_opaque(t) == ("e2" not in str(t))


@given(st.integers(0, 10 ** 6))
@settings(max_examples=100)
def test_desugar_is_idempotent_and_keeps_free_variables(seed):
    f = random_formula(random.Random(seed), constants=CONSTANT_POOL, depth=3, p_eq=0.3,
                       free=[Var("x", E1), Var("w", E2)])
    g = desugar(f)
    assert desugar(g) == g
    assert free_variables(g) == free_variables(f)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=100)
def test_alpha_renaming_preserves_alpha_class(seed):
    f = random_formula(random.Random(seed), constants=CONSTANT_POOL, depth=4)
    assert alpha_equal(f, rename_bound(f, stem="V"))


@given(st.integers(0, 10 ** 6))
@settings(max_examples=100)
def test_substituting_a_constant_removes_the_variable(seed):
    x = Var("x", E1)
    f = random_formula(random.Random(seed), constants=CONSTANT_POOL, depth=4, free=[x, Var("w", E2)])
    assert free_variables(substitute(f, x, Const("c", E1))) == free_variables(f) - {x}


@given(st.sampled_from(["x^e1", "c^e1", "y^e1"]), st.sampled_from(["x^e1", "d^e1", "z^e1"]),
       st.sampled_from(["{}", "P^<e1>(x^e1) & {}", "forall x^e1 . {}", "!({})", "{} -> Q^<e2>(a^e2)"]))
def test_identity_at_e1_never_parses(left, right, context):
    with pytest.raises(IdentityError):
        parse_formula(context.format(f"{left} = {right}"))
