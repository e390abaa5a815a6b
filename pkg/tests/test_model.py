from __future__ import annotations

import itertools
import random
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from oplogic.errors import ClassificationError, DomainError, FrameError, SizeError
from oplogic.generators import constants_for, random_formula, random_frame, random_interpretation
from oplogic.lang import (
    E1, E2, And, Atom, Const, Eq, Exists, Forall, Iff, Implies, Not, Or, Var,
    desugar, identity_expansion, parse_formula, parse_type, tup, universal_closure,
)
from oplogic.model import (
    FrameDocument, FrameSpec, Interpretation, bounded_validity, build_frame,
    dump_frame_document, is_true, make_frame, parse_frame_document,
    permutation_invariance_check, permutation_invariance_report, pseudo_diagonal,
    satisfies, valuations, veiled_extension,
)
from oplogic.proof import load_proof
from oplogic.qset import EMPTY, QSet

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
P1 = tup(E1)
P = Const("P", P1)


# -- independent oracles ---------------------------------------------------------

def species_perms(species):
    # every label permutation that maps each atom to one of the same species
    labels = range(1, len(species) + 1)
    for img in itertools.permutations(labels):
        if all(species[k - 1] == species[img[k - 1] - 1] for k in labels):
            yield img


def act(perm, t, x):
    if t == E1:
        return perm[x - 1]
    if t == E2:
        return x
    return frozenset(tuple(act(perm, c, v) for c, v in zip(t.components, row)) for row in x)


def invariant_subset_count(points, comps, species):
    # count subsets of points fixed by every permutation, by brute force
    perms = list(species_perms(species))
    n = 0
    for mask in range(1 << len(points)):
        s = frozenset(p for k, p in enumerate(points) if mask >> k & 1)
        if all(frozenset(tuple(act(g, c, v) for c, v in zip(comps, p)) for p in s) == s for g in perms):
            n += 1
    return n


def naive(frame, env, f):
    """Plain recursive evaluation; identity by direct search for a relabeling."""
    if isinstance(f, Atom):
        return tuple(env[a] for a in f.args) in env[f.head]
    if isinstance(f, Not):
        return not naive(frame, env, f.body)
    if isinstance(f, Implies):
        return not naive(frame, env, f.left) or naive(frame, env, f.right)
    if isinstance(f, And):
        return naive(frame, env, f.left) and naive(frame, env, f.right)
    if isinstance(f, Or):
        return naive(frame, env, f.left) or naive(frame, env, f.right)
    if isinstance(f, Iff):
        return naive(frame, env, f.left) == naive(frame, env, f.right)
    if isinstance(f, (Forall, Exists)):
        results = (naive(frame, {**env, f.var: x}, f.body) for x in frame.domain(f.var.type))
        return all(results) if isinstance(f, Forall) else any(results)
    if isinstance(f, Eq):
        a, b, t = env[f.left], env[f.right], f.left.type
        return any(act(g, t, a) == b for g in species_perms(frame.species))
    raise TypeError(f)


# -- frames ------------------------------------------------------------------------

def test_standard_unary_domain():
    assert len(make_frame(2, 1, [P1]).domain(P1)) == 4


def test_symmetric_unary_domain_keeps_first_order_relations():
    # first-order relation types stay full so orbit-mates exist to be identified
    f = make_frame(2, 1, [P1], "symmetric")
    assert len(f.domain(P1)) == 4
    assert (frozenset({(1,)}), frozenset({(2,)})) in pseudo_diagonal(f, P1)


def test_empty_pure_part():
    f = make_frame(0, 1, [P1, tup(P1)], "symmetric")
    assert f.domain(E1) == () and f.domain(P1) == (frozenset(),)


@pytest.mark.parametrize("n, tname", [
    (2, "<<e1>>"), (3, "<<e1>>"), (2, "<e1,<e1>>"), (2, "<<e1,e1>>"), (2, "<<e1>,e2>"), (1, "<<e1>,<e1>>"),
])
def test_symmetric_higher_order_domains_are_invariant_subsets(n, tname):
    t = parse_type(tname)
    f = make_frame(n, 2, [t], "symmetric", budget=1 << 16)
    points = list(itertools.product(*(f.domain(c) for c in t.components)))
    assert len(f.domain(t)) == invariant_subset_count(points, t.components, f.species)


def test_frozen_symmetric_counts():
    assert len(make_frame(2, 1, [tup(P1)], "symmetric").domain(tup(P1))) == 8
    assert len(make_frame(2, 1, [tup(P1)], "standard").domain(tup(P1))) == 16


def test_two_species_split_orbits():
    f = build_frame(FrameSpec((("s", 1), ("t", 1)), ("a",), (tup(P1),), "symmetric"))
    # no relabeling can move atom 1 to atom 2, so every <e1> set is its own orbit
    assert len(f.domain(tup(P1))) == 16


def test_frame_errors():
    with pytest.raises(FrameError):
        build_frame(FrameSpec.simple(1, 0))
    with pytest.raises(SizeError):
        make_frame(3, 2, [tup(E1, E1, E1)], budget=64)
    with pytest.raises(SizeError):
        make_frame(1, 1, [parse_type("<<<e1>>>")], max_depth=2)
    with pytest.raises(FrameError):
        make_frame(1, 1).domain(P1)


def test_custom_frame_lists_exact_relations():
    spec = FrameSpec((("s", 2),), ("a",), (), "custom", relations={P1: [[], [(1,)]]})
    f = build_frame(spec)
    assert f.domain(P1) == (frozenset(), frozenset({(1,)}))
    bad = FrameSpec((("s", 2),), ("a",), (), "custom", relations={P1: [[(3,)]]})
    with pytest.raises(FrameError):
        build_frame(bad)


# -- pseudo-diagonal ------------------------------------------------------------

def test_pseudo_diagonal_examples():
    f = make_frame(2, 2, [P1], "standard")
    assert pseudo_diagonal(f, E2).pairs == {("a", "a"), ("b", "b")}
    d = pseudo_diagonal(f, P1)
    assert (frozenset({(1,)}), frozenset({(2,)})) in d
    assert all((x, x) in d for x in f.domain(P1))
    with pytest.raises(DomainError):
        pseudo_diagonal(f, E1)


@pytest.mark.parametrize("kind", ["standard", "symmetric"])
@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("tname", ["e2", "<e1>", "<e1,e2>", "<e1,e1>"])
def test_pseudo_diagonal_is_an_equivalence(kind, n, tname):
    t = parse_type(tname)
    f = make_frame(n, 2, [t], kind)
    d = pseudo_diagonal(f, t)
    dom = f.domain(t)
    rel = {(a, b) for a in dom for b in dom if (a, b) in d}
    assert all((a, a) in rel for a in dom)
    assert all((b, a) in rel for a, b in rel)
    assert all((a, c) in rel for a, b in rel for b2, c in rel if b == b2)


@pytest.mark.parametrize("n, n_M, tname", [
    (1, 2, "e2"), (3, 2, "e2"), (1, 2, "<e1>"), (2, 2, "<e1>"), (3, 2, "<e1>"),
    (1, 2, "<e1,e2>"), (2, 1, "<e1,e2>"), (2, 1, "<e1,e1>"),
])
def test_leibniz_identity_readings(n, n_M, tname):
    # standard frames can only be built while the <t> domain stays small
    t = parse_type(tname)
    u, v = Var("U1", t), Var("V1", t)
    leibniz = desugar(identity_expansion(u, v))
    for kind in ("symmetric", "standard"):
        f = make_frame(n, n_M, [tup(t)], kind, budget=1 << 16)
        i = Interpretation(f)
        d = pseudo_diagonal(f, t)
        for a in f.domain(t):
            for b in f.domain(t):
                got = satisfies(i, {u: a, v: b}, leibniz)
                assert got == ((a, b) in d if kind == "symmetric" else a == b)


# -- satisfaction and truth --------------------------------------------------------

def test_size_one_extension_example():
    f = make_frame(2, 1, [P1])
    i = Interpretation(f, {P: frozenset({(1,)})})
    assert satisfies(i, {}, parse_formula("exists x^e1 . P^<e1>(x)"))
    assert not satisfies(i, {}, parse_formula("forall x^e1 . P^<e1>(x)"))


def test_symmetric_identity_between_orbit_mates():
    f = make_frame(2, 1, [P1, tup(P1)], "symmetric")
    i = Interpretation(f)
    eq = parse_formula("X^<e1> = Y^<e1>")
    F, G = Var("X", P1), Var("Y", P1)
    one, two = frozenset({(1,)}), frozenset({(2,)})
    assert satisfies(i, {F: one, G: two}, eq)
    assert satisfies(i, {F: one, G: two}, desugar(eq))


def test_negation_flips():
    f = make_frame(2, 1, [P1])
    i = Interpretation(f, {P: frozenset({(1,)})})
    a = parse_formula("P^<e1>(x^e1)")
    for v in valuations(f, [Var("x", E1)]):
        assert satisfies(i, v, Not(a)) != satisfies(i, v, a)


def test_truth_examples():
    f = make_frame(2, 1, [P1])
    empty = Interpretation(f, {P: frozenset()})
    assert not is_true(empty, parse_formula("P^<e1>(x^e1)"))
    taut = parse_formula("P^<e1>(c^e1) -> P(c)")
    for den in f.domain(P1):
        for c in f.domain(E1):
            assert is_true(Interpretation(f, {P: den, Const("c", E1): c}), taut)


def test_orbit_variants_move_constants():
    f = make_frame(2, 1, [P1])
    i = Interpretation(f, {P: frozenset({(1,)}), Const("c", E1): 1})
    g = parse_formula("P^<e1>(c^e1)")
    assert is_true(i, g, orbit_variants=False)
    assert not is_true(i, g)


def test_missing_type_is_an_error():
    with pytest.raises(FrameError):
        satisfies(Interpretation(make_frame(1, 1)), {}, parse_formula("forall X^<e1> . X(c^e1) -> X(c)"))


@given(st.integers(0, 10 ** 6))
@settings(max_examples=60, deadline=None)
def test_free_formula_true_iff_closure_true(seed):
    rng = random.Random(seed)
    frame = random_frame(rng, max_nm=2, max_M=2)
    consts = constants_for(frame)
    f = random_formula(rng, constants=consts, depth=3, free=[Var("x", E1), Var("w", E2)])
    i = random_interpretation(rng, frame, consts)
    assert is_true(i, f, orbit_variants=False) == satisfies(i, {}, universal_closure(f))


@given(st.integers(0, 10 ** 6))
@settings(max_examples=1000, deadline=None)
def test_satisfies_agrees_with_naive_evaluator(seed):
    rng = random.Random(seed)
    frame = random_frame(rng, max_nm=2, max_M=2)
    consts = constants_for(frame)
    free = [Var("x", E1), Var("w", E2)]
    f = random_formula(rng, constants=consts, depth=5, free=free, p_eq=0.2)
    i = random_interpretation(rng, frame, consts)
    v = {x: rng.choice(frame.domain(x.type)) for x in free}
    assert satisfies(i, v, f) == naive(frame, {**i.denotation, **v}, f)


# -- permutation invariance -----------------------------------------------------

def test_identity_and_swap_preserve_truth():
    f = make_frame(2, 1, [P1])
    i = Interpretation(f, {P: frozenset({(1,)})})
    g = parse_formula("exists x^e1 . P^<e1>(x)")
    swapped = i.permuted((2, 1))
    assert swapped.denotation[P] == frozenset({(2,)})
    assert satisfies(swapped, {}, g) == satisfies(i, {}, g) == satisfies(i.permuted((1, 2)), {}, g)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=100, deadline=None)
def test_global_relabeling_invariance(seed):
    rng = random.Random(seed)
    frame = random_frame(rng)
    consts = constants_for(frame)
    f = random_formula(rng, constants=consts, depth=4, p_eq=0.2)
    rep = permutation_invariance_report(random_interpretation(rng, frame, consts), f, trials=5, seed=seed)
    assert rep.ok and rep.failures == 0


def test_invariance_check_boolean():
    i = Interpretation(make_frame(3, 1, [P1]), {P: frozenset({(2,)})})
    assert permutation_invariance_check(i, parse_formula("exists x^e1 . P^<e1>(x)"), trials=10)


# -- veiled extensions ----------------------------------------------------------

def test_veiled_extension():
    f = make_frame(3, 1, [P1, tup(E2)])
    assert veiled_extension(Interpretation(f, {P: frozenset({(1,)})}), P) == QSet({"s": 1})
    assert veiled_extension(Interpretation(f, {P: frozenset()}), P) == EMPTY
    q = Const("Q", tup(E2))
    with pytest.raises(ClassificationError, match="not an opaque predicate"):
        veiled_extension(Interpretation(f, {q: frozenset()}), q)


# -- bounded validity ----------------------------------------------------------

def test_tautology_has_no_counterexample():
    r = bounded_validity(parse_formula("P^<e1>(c^e1) -> P(c)"), max_nm=2, max_M=2)
    assert r.holds and r.verdict == "no-counterexample" and not r.incomplete


def test_universal_claim_refuted_by_empty_extension():
    r = bounded_validity(parse_formula("forall x^e1 . P^<e1>(x)"), max_nm=2, max_M=1, max_depth=1)
    assert r.verdict == "counterexample"
    ce = r.counterexample
    assert ce.frame.n_atoms == 1 and ce.denotation[P] == frozenset()


def test_empty_pure_part_refutes_existence():
    f = load_proof(CORPUS / "forall_exists.prf").lines[-1].formula
    assert bounded_validity(f, max_nm=2, max_M=1).holds
    assert not bounded_validity(f, max_nm=2, max_M=1, min_nm=0).holds


def test_budget_skips_frames_and_flags_incompleteness():
    f = parse_formula("forall X^<e1,e1,e1> . X(c^e1, c, c) -> X(c, c, c)")
    r = bounded_validity(f, max_nm=3, max_M=1, kind="standard", budget=256)
    assert r.incomplete and r.skipped_frames and r.holds


def test_premises_filter_interpretations():
    f = parse_formula("P^<e1>(c^e1)")
    r = bounded_validity(f, max_nm=2, max_M=1, premises=[parse_formula("forall x^e1 . P^<e1>(x)")])
    assert r.holds and r.skipped_premises > 0


def test_workers_do_not_change_the_result():
    f = parse_formula("forall x^e1 . exists Y^<e1> . Y(x) & !R^<e1,e1>(x, x)")
    a = bounded_validity(f, max_nm=3, max_M=2, workers=1)
    b = bounded_validity(f, max_nm=3, max_M=2, workers=2)
    assert (a.verdict, a.frames_checked, a.interpretations_checked, a.valuations_checked) == \
        (b.verdict, b.frames_checked, b.interpretations_checked, b.valuations_checked)
    assert (a.counterexample is None) == (b.counterexample is None)
    if a.counterexample:
        assert a.counterexample.denotation == b.counterexample.denotation


@pytest.mark.parametrize("path", sorted(CORPUS.glob("*.prf")), ids=lambda p: p.stem)
def test_corpus_theorems_have_no_bounded_counterexample(path):
    proof = load_proof(path)
    normal = [ln.formula for ln in proof.lines if ln.justification.rule == "A4"]
    r = bounded_validity(proof.lines[-1].formula, 3, 2, 2, "symmetric",
                         premises=proof.premises, normal_instances=normal)
    assert r.holds, path.stem


# -- frame files ---------------------------------------------------------------------

def test_counterexample_document_round_trip():
    g = parse_formula("forall x^e1 . P^<e1>(x)")
    ce = bounded_validity(g, max_nm=2, max_M=1).counterexample
    doc = FrameDocument(ce.frame, ce.denotation, ce.valuation, g)
    for fmt in ("yaml", "json"):
        back = parse_frame_document(dump_frame_document(doc, fmt))
        assert back.formula == g
        assert back.denotation == doc.denotation
        assert back.frame.domain(P1) == ce.frame.domain(P1)
        assert is_true(Interpretation(back.frame, back.denotation), back.formula) is False


def test_frame_document_custom_relations():
    text = """
version: 1
kind: custom
m: {s: 2}
M: [a]
relations:
  <e1>: [[], [s.1]]
denotation:
  P^<e1>: [s.1]
formula: exists x^e1 . P^<e1>(x)
"""
    doc = parse_frame_document(text)
    i = Interpretation(doc.frame, doc.denotation)
    assert len(doc.frame.domain(P1)) == 2
    assert is_true(i, doc.formula)


@pytest.mark.parametrize("kind", ["standard", "symmetric"])
@pytest.mark.parametrize("n, tname", [(2, "<e1>"), (1, "<e1,e2>"), (2, "<<e1>>"), (2, "e2")])
def test_mask_enumeration_matches_direct_leibniz(kind, n, tname):
    from oplogic.model.frames import classical_tags
    from oplogic.suite import _leibniz_by_masks
    t = parse_type(tname)
    spec = FrameSpec((("s", n),), classical_tags(2), (t, tup(t)), kind, budget=1 << 16, max_depth=3)
    info, leib = _leibniz_by_masks(spec, t)
    frame = build_frame(spec)
    u, v = Var("U1", t), Var("V1", t)
    g = desugar(identity_expansion(u, v))
    i = Interpretation(frame)
    direct = {(a, b) for a in frame.domain(t) for b in frame.domain(t) if satisfies(i, {u: a, v: b}, g)}
    assert leib == direct
