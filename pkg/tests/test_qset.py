from __future__ import annotations

import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from oplogic.errors import DomainError, ParseError, SizeError
from oplogic.qset import (
    EMPTY, MAtom, QSet, Species, combine, concretize, format_qset, indist,
    is_subqset, parse_qset, permute_exchange, power_profile, quasi_cardinal,
    quotient, relabel, strong_singleton,
)

species_st = st.sampled_from(["s", "t", "u"])
pure_st = st.dictionaries(species_st, st.integers(0, 5), max_size=3)
tags_st = st.lists(st.sampled_from(["a", "b", "c", "d"]), max_size=4)


@st.composite
def qsets(draw, nested=True):
    cl = list(draw(tags_st))
    if nested and draw(st.booleans()):
        cl.append(QSet({}, draw(tags_st)))
    return QSet(draw(pure_st), cl)


def test_quasi_cardinal_counts_atoms_and_classical_members():
    q = QSet({"s": 3, "t": 1}, ["a", "b"])
    assert quasi_cardinal(q) == 6
    assert quasi_cardinal(EMPTY) == 0


def test_zero_multiplicities_are_dropped():
    assert QSet({"s": 0, "t": 2}) == QSet({"t": 2})
    assert QSet({"s": 0}).is_pure


def test_negative_multiplicity_rejected():
    with pytest.raises(DomainError):
        QSet({"s": -1})


def test_nested_pure_qset_forbidden_in_classical_part():
    with pytest.raises(DomainError):
        QSet({}, [QSet({"s": 1})])


def test_classical_duplicates_collapse():
    assert QSet({}, ["a", "a", MAtom("a")]) == QSet({}, ["a"])


def test_indist_is_weak_extensionality():
    assert indist(QSet({"s": 2}), QSet({"s": 2}))
    assert not indist(QSet({"s": 2}), QSet({"s": 3}))
    assert not indist(QSet({"s": 2}), QSet({"t": 2}))
    assert not indist(QSet({"s": 1}, ["a"]), QSet({"s": 1}, ["b"]))


def test_power_profile_small_case():
    prof = power_profile(QSet({"s": 2}, ["a"]))
    assert prof.total() == 8
    assert prof[QSet({"s": 1})] == 2
    assert prof[QSet({"s": 1}, ["a"])] == 2
    assert prof.by_cardinal() == {0: 1, 1: 3, 2: 3, 3: 1}


def test_power_profile_bound():
    with pytest.raises(SizeError):
        power_profile(QSet({"s": 21}))


@pytest.mark.parametrize("n", range(0, 9))
def test_power_profile_matches_labeled_subsets(n):
    # oracle: enumerate labeled subsets of two species directly
    a, b = n // 2, n - n // 2
    counts: dict[tuple[int, int], int] = {}
    for mask in range(1 << n):
        ka = sum(1 for k in range(a) if mask >> k & 1)
        kb = sum(1 for k in range(a, n) if mask >> k & 1)
        counts[ka, kb] = counts.get((ka, kb), 0) + 1
    prof = power_profile(QSet({"s": a, "t": b}))
    assert {(s.multiplicity("s"), s.multiplicity("t")): m for s, m in prof} == counts


def test_strong_singleton():
    assert strong_singleton(QSet({"s": 3, "t": 1}), "s") == QSet({"s": 1})
    with pytest.raises(DomainError):
        strong_singleton(QSet({"t": 1}), "s")


def test_combine_modes():
    q1, q2 = QSet({"s": 3, "t": 1}, ["a"]), QSet({"s": 1, "u": 2}, ["a", "b"])
    assert combine("union", q1, q2) == QSet({"s": 3, "t": 1, "u": 2}, ["a", "b"])
    assert combine("intersection", q1, q2) == QSet({"s": 1}, ["a"])
    assert combine("difference", q1, q2) == QSet({"s": 2, "t": 1})
    with pytest.raises(DomainError):
        combine("xor", q1, q2)


def test_format_example():
    q = QSet({"s1": 3, "s2": 1}, ["a", "b"])
    assert format_qset(q) == 'qset{ pure: {s1: 3, s2: 1}, classical: ["a", "b"] }'


def test_parse_error_position():
    with pytest.raises(ParseError) as exc:
        parse_qset("qset{ pure: {s: x}, classical: [] }")
    assert exc.value.column == 17


def test_parse_rejects_atoms_in_nested_classical():
    with pytest.raises(ParseError):
        parse_qset('qset{ pure: {}, classical: [qset{ pure: {s: 1}, classical: [] }] }')


@given(qsets())
def test_format_parse_round_trip(q):
    assert parse_qset(format_qset(q)) == q


@given(qsets())
def test_quasi_cardinal_is_sum(q):
    assert quasi_cardinal(q) == sum(q.pure.values()) + len(q.classical)


@given(qsets(), qsets())
def test_indist_reflexive_and_symmetric(q1, q2):
    assert indist(q1, q1)
    assert indist(q1, q2) == indist(q2, q1)


@given(qsets(nested=False))
@settings(max_examples=60)
def test_power_profile_sums_to_two_power_qc(q):
    prof = power_profile(q)
    assert prof.total() == 2 ** quasi_cardinal(q)
    for shape, mult in prof:
        assert is_subqset(shape, q)
        assert mult == math.prod(math.comb(q.multiplicity(s), shape.multiplicity(s)) for s in q.species())


@given(qsets(), qsets())
def test_intersection_below_union(q1, q2):
    lo, hi = combine("intersection", q1, q2), combine("union", q1, q2)
    assert is_subqset(lo, q1) and is_subqset(lo, q2)
    assert is_subqset(q1, hi) and is_subqset(q2, hi)


@given(qsets(nested=False), st.data())
def test_same_species_exchange_is_unobservable(q, data):
    c = concretize(q)
    if len(c.labels) < 1:
        return
    realized = data.draw(st.frozensets(st.sampled_from(list(c.labels))))
    c = c.with_realized(realized)
    i = data.draw(st.sampled_from(list(c.labels)))
    j = data.draw(st.sampled_from([k for k in c.labels if c.same_species(i, k)]))
    after, same = permute_exchange(c, i, j)
    assert same
    assert indist(quotient(c, realized, ()), quotient(after, after.realized[0][0], ()))


def test_cross_species_exchange_rejected():
    c = concretize(QSet({"s": 1, "t": 1}))
    with pytest.raises(DomainError):
        permute_exchange(c, 1, 2)
    with pytest.raises(DomainError):
        relabel(c, {1: 2, 2: 1})


def test_concretization_lays_out_species_in_order():
    c = concretize(QSet({"t": 1, "s": 2}))
    assert c.species == (Species("s"), Species("s"), Species("t"))
    assert quotient(c) == QSet({"s": 2, "t": 1})
    assert quotient(c, [3]) == QSet({"t": 1})


def test_all_exchanges_small_qset():
    # exhaustive over a fixed qset: every same-species pair, every realized subset
    c0 = concretize(QSet({"s": 2, "t": 2}))
    for r in range(5):
        for subset in itertools.combinations(c0.labels, r):
            c = c0.with_realized(frozenset(subset))
            for i in c.labels:
                for j in c.labels:
                    if c.same_species(i, j):
                        assert permute_exchange(c, i, j)[1]


@given(qsets(), qsets())
def test_union_plus_intersection_cardinals(q1, q2):
    u, i = combine("union", q1, q2), combine("intersection", q1, q2)
    assert quasi_cardinal(u) + quasi_cardinal(i) == quasi_cardinal(q1) + quasi_cardinal(q2)


@given(qsets(nested=False))
@settings(max_examples=60)
def test_subqsets_of_every_cardinal(q):
    cards = power_profile(q).by_cardinal()
    assert all(cards.get(b, 0) > 0 for b in range(quasi_cardinal(q) + 1))


@given(qsets(), qsets(), qsets())
def test_indist_transitive(q1, q2, q3):
    if indist(q1, q2) and indist(q2, q3):
        assert indist(q1, q3)


@given(qsets(nested=False), qsets(nested=False))
@settings(max_examples=60)
def test_public_operations_respect_indist(q, r):
    # rebuild q from its printed form: an indistinguishable copy with fresh objects
    q2 = parse_qset(format_qset(q))
    assert indist(q, q2)
    assert quasi_cardinal(q) == quasi_cardinal(q2)
    assert power_profile(q).by_cardinal() == power_profile(q2).by_cardinal()
    for mode in ("union", "intersection", "difference"):
        assert indist(combine(mode, q, r), combine(mode, q2, r))
    for s in q.species():
        assert indist(strong_singleton(q, s), strong_singleton(q2, s))
