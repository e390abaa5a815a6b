"""Finite kernel of quasi-set theory.

A pure quasi-set is described only by how many m-atoms of each species it
holds; individual m-atoms have no public identity.  The classical part of a
quasi-set holds M-atoms (classical Urelemente, compared by tag) and nested
quasi-sets whose transitive closure contains no m-atoms ("sets").

Hidden labels appear only inside :class:`LabeledConcretization`, which
realizes a quasi-set over labeled atoms ``1..n`` so that finite checks (the
exchange of indistinguishable atoms, labeled brute-force oracles) can be run.
Everything that leaves a concretization goes through :func:`quotient`.

Text format (round-trips through :func:`format_qset` / :func:`parse_qset`)::

    qset   := "qset" "{" "pure" ":" "{" [pair ("," pair)*] "}" ","
                         "classical" ":" "[" [elem ("," elem)*] "]" "}"
    pair   := IDENT ":" INT
    elem   := STRING | qset

``STRING`` is a double-quoted JSON string literal.  The printer sorts species
by tag, drops zero multiplicities, and lists M-atoms (sorted) before nested
sets (sorted by their printed form).
"""

from __future__ import annotations

import itertools
import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Union

from .errors import DomainError, ParseError, SizeError

__all__ = [
    "Species", "MAtom", "QSet", "PowerProfile", "LabeledConcretization",
    "EMPTY", "DEFAULT_SPECIES", "quasi_cardinal", "indist", "combine",
    "power_profile", "strong_singleton", "is_subqset", "concretize",
    "quotient", "relabel", "permute_exchange", "format_qset", "parse_qset",
]

POWER_BOUND = 20


@dataclass(frozen=True)
class Species:
    """Tag for a class of mutually indistinguishable m-atoms."""

    tag: str

    def __str__(self) -> str:
        return self.tag


DEFAULT_SPECIES = Species("s")


@dataclass(frozen=True)
class MAtom:
    """Classical Urelement; two M-atoms are indistinguishable iff same tag."""

    tag: str

    def __str__(self) -> str:
        return json.dumps(self.tag)


ClassicalElem = Union[MAtom, "QSet"]


def _species(key) -> Species:
    return key if isinstance(key, Species) else Species(str(key))


def _classical(elem) -> ClassicalElem:
    if isinstance(elem, str):
        return MAtom(elem)
    if isinstance(elem, MAtom):
        return elem
    if isinstance(elem, QSet):
        if not elem.is_set():
            raise DomainError("classical members must be M-atoms or sets without m-atoms")
        return elem
    raise DomainError(f"not a classical element: {elem!r}")


class QSet:
    """Immutable finite quasi-set.

    ``pure`` maps species to multiplicities; ``classical`` is a collection of
    M-atom tags (plain strings are accepted) and pure-free nested QSets.
    """

    __slots__ = ("_pure", "_classical", "_hash")

    def __init__(self, pure: Mapping | None = None, classical: Iterable = ()):
        counts: dict[Species, int] = {}
        for key, mult in (pure or {}).items():
            if not isinstance(mult, int) or isinstance(mult, bool) or mult < 0:
                raise DomainError(f"multiplicity must be a non-negative integer, got {mult!r}")
            sp = _species(key)
            counts[sp] = counts.get(sp, 0) + mult
        object.__setattr__(self, "_pure", tuple(sorted(
            ((s, m) for s, m in counts.items() if m), key=lambda sm: sm[0].tag)))
        object.__setattr__(self, "_classical", frozenset(_classical(e) for e in classical))
        object.__setattr__(self, "_hash", hash((self._pure, self._classical)))

    def __setattr__(self, name, value):
        raise AttributeError("QSet is immutable")

    @property
    def pure(self) -> dict[Species, int]:
        return dict(self._pure)

    @property
    def classical(self) -> frozenset:
        return self._classical

    def multiplicity(self, species) -> int:
        return dict(self._pure).get(_species(species), 0)

    def species(self) -> tuple[Species, ...]:
        return tuple(s for s, _ in self._pure)

    def is_pure(self) -> bool:
        """True iff every element is an m-atom."""
        return not self._classical

    def is_set(self) -> bool:
        """The Z predicate: no m-atom anywhere in the transitive closure."""
        return not self._pure and all(
            isinstance(e, MAtom) or e.is_set() for e in self._classical)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QSet):
            return NotImplemented
        return self._pure == other._pure and self._classical == other._classical

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return format_qset(self)

    __str__ = __repr__


EMPTY = QSet()


def quasi_cardinal(q: QSet) -> int:
    return sum(m for _, m in q._pure) + len(q._classical)


def _indist_elem(a: ClassicalElem, b: ClassicalElem) -> bool:
    if isinstance(a, MAtom) or isinstance(b, MAtom):
        return isinstance(a, MAtom) and isinstance(b, MAtom) and a.tag == b.tag
    return indist(a, b)


def indist(q1: QSet, q2: QSet) -> bool:
    """Weak extensionality: same quantity of elements of the same sort.

    Pure parts must agree species by species; classical parts must be matched
    one-to-one by recursive indistinguishability (extensional equality for
    M-atoms and sets).
    """
    if q1._pure != q2._pure or len(q1._classical) != len(q2._classical):
        return False
    unmatched = list(q2._classical)
    for a in q1._classical:
        for k, b in enumerate(unmatched):
            if _indist_elem(a, b):
                del unmatched[k]
                break
        else:
            return False
    return True


def combine(mode: str, q1: QSet, q2: QSet) -> QSet:
    """Union, intersection or difference.

    Multiplicities combine by max / min / truncated subtraction, i.e. as the
    labeled operation on a common pool of atoms followed by a quotient.
    """
    a, b = q1.pure, q2.pure
    keys = set(a) | set(b)
    if mode == "union":
        pure = {s: max(a.get(s, 0), b.get(s, 0)) for s in keys}
        classical = q1.classical | q2.classical
    elif mode == "intersection":
        pure = {s: min(a.get(s, 0), b.get(s, 0)) for s in keys}
        classical = q1.classical & q2.classical
    elif mode == "difference":
        pure = {s: max(a.get(s, 0) - b.get(s, 0), 0) for s in keys}
        classical = q1.classical - q2.classical
    else:
        raise DomainError(f"unknown combine mode {mode!r}")
    return QSet(pure, classical)


def is_subqset(sub: QSet, q: QSet) -> bool:
    return all(m <= q.multiplicity(s) for s, m in sub._pure) and sub.classical <= q.classical


@dataclass(frozen=True)
class PowerProfile:
    """Subqset shapes of a source qset with their labeled multiplicities."""

    entries: tuple[tuple[QSet, int], ...]

    def as_dict(self) -> dict[QSet, int]:
        return dict(self.entries)

    def __getitem__(self, shape: QSet) -> int:
        return self.as_dict().get(shape, 0)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[QSet, int]]:
        return iter(self.entries)

    def total(self) -> int:
        return sum(m for _, m in self.entries)

    def by_cardinal(self) -> dict[int, int]:
        """Summed multiplicity per quasi-cardinal of the shape."""
        out: Counter = Counter()
        for shape, mult in self.entries:
            out[quasi_cardinal(shape)] += mult
        return dict(sorted(out.items()))


def power_profile(q: QSet, bound: int = POWER_BOUND) -> PowerProfile:
    """Enumerate subqset shapes of ``q``.

    A shape keeps ``k_s <= mult_s`` atoms of each species and any subset of
    the classical part; its multiplicity is ``prod_s C(mult_s, k_s)``, so the
    multiplicities add up to ``2 ** qc(q)``.
    """
    n = quasi_cardinal(q)
    if n > bound:
        raise SizeError(f"quasi-cardinal {n} exceeds power_profile bound {bound}")
    species = q._pure
    classical = sorted(q.classical, key=_elem_key)
    entries = []
    for ks in itertools.product(*(range(m + 1) for _, m in species)):
        mult = math.prod(math.comb(m, k) for (_, m), k in zip(species, ks))
        pure = {s: k for (s, _), k in zip(species, ks)}
        for r in range(len(classical) + 1):
            for sub in itertools.combinations(classical, r):
                entries.append((QSet(pure, sub), mult))
    return PowerProfile(tuple(entries))


def strong_singleton(q: QSet, species) -> QSet:
    """Subqset of quasi-cardinal 1 drawn from the atoms of ``species``."""
    sp = _species(species)
    if q.multiplicity(sp) < 1:
        raise DomainError(f"species {sp} does not occur in {q}")
    return QSet({sp: 1})


# -- labeled concretizations -------------------------------------------------

@dataclass(frozen=True)
class LabeledConcretization:
    """Labeled realization of a quasi-set over atoms ``1..n``.

    ``species[k - 1]`` is the species of atom ``k``.  ``realized`` holds
    concrete labeled subsets (each a frozenset of labels together with a
    subset of the classical part) standing for subqsets of interest.
    """

    species: tuple[Species, ...]
    classical: frozenset = frozenset()
    realized: tuple[tuple[frozenset, frozenset], ...] = ()

    @property
    def labels(self) -> range:
        return range(1, len(self.species) + 1)

    def species_of(self, label: int) -> Species:
        if not 1 <= label <= len(self.species):
            raise DomainError(f"no atom labeled {label}")
        return self.species[label - 1]

    def same_species(self, i: int, j: int) -> bool:
        return self.species_of(i) == self.species_of(j)

    def with_realized(self, *subsets) -> "LabeledConcretization":
        """Return a copy realizing the given label sets (or (labels, classical) pairs)."""
        items = []
        for sub in subsets:
            if isinstance(sub, tuple) and len(sub) == 2 and isinstance(sub[0], (set, frozenset)):
                labels, cl = sub
            else:
                labels, cl = sub, ()
            labels = frozenset(labels)
            for k in labels:
                self.species_of(k)
            cl = frozenset(_classical(e) for e in cl)
            if not cl <= self.classical:
                raise DomainError("realized classical part is not a subset of the source")
            items.append((labels, cl))
        return LabeledConcretization(self.species, self.classical, tuple(items))


def concretize(q: QSet, *realized) -> LabeledConcretization:
    """Lay out the atoms of ``q`` as labels ``1..qc``, species by species."""
    species = tuple(s for s, m in q._pure for _ in range(m))
    base = LabeledConcretization(species, q.classical)
    return base.with_realized(*realized) if realized else base


def quotient(c: LabeledConcretization, labels: Iterable[int] | None = None,
             classical: Iterable | None = None) -> QSet:
    """Forget labels: count atoms per species.

    With no arguments the whole concretization is quotiented.
    """
    labels = c.labels if labels is None else labels
    counts = Counter(c.species_of(k) for k in labels)
    cl = c.classical if classical is None else classical
    return QSet(dict(counts), cl)


def relabel(c: LabeledConcretization, perm: Mapping[int, int]) -> LabeledConcretization:
    """Apply a species-preserving label permutation to every realized subset."""
    full = {k: perm.get(k, k) for k in c.labels}
    if sorted(full.values()) != list(c.labels):
        raise DomainError("not a permutation of the labels")
    for k, v in full.items():
        if c.species_of(k) != c.species_of(v):
            raise DomainError(f"permutation maps atom {k} to atom {v} of another species")
    realized = tuple((frozenset(full[k] for k in labels), cl) for labels, cl in c.realized)
    return LabeledConcretization(c.species, c.classical, realized)


def permute_exchange(c: LabeledConcretization, i: int, j: int) -> tuple[LabeledConcretization, bool]:
    """Exchange atoms ``i`` and ``j`` and report whether anything observable changed.

    The returned flag compares the quotients of every realized subset (and of
    the whole concretization) before and after the swap with :func:`indist`.
    """
    if not c.same_species(i, j):
        raise DomainError(f"atoms {i} and {j} belong to different species")
    after = relabel(c, {i: j, j: i})
    same = indist(quotient(c), quotient(after)) and all(
        indist(quotient(c, a, ca), quotient(after, b, cb))
        for (a, ca), (b, cb) in zip(c.realized, after.realized))
    return after, same


# -- text format ---------------------------------------------------------------

def _elem_key(e: ClassicalElem):
    return (0, e.tag) if isinstance(e, MAtom) else (1, format_qset(e))


def format_qset(q: QSet) -> str:
    pure = ", ".join(f"{s.tag}: {m}" for s, m in q._pure)
    elems = ", ".join(str(e) if isinstance(e, MAtom) else format_qset(e)
                      for e in sorted(q.classical, key=_elem_key))
    return f"qset{{ pure: {{{pure}}}, classical: [{elems}] }}"


_TOKEN = re.compile(r'\s*(?:(?P<str>"(?:[^"\\]|\\.)*")|(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[{}\[\]:,]))')


class _QSetParser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m:
                raise self._error(f"unexpected character {text[pos:].lstrip()[:1]!r}", pos)
            kind = m.lastgroup
            start = m.start(kind)
            self.tokens.append((kind, m.group(kind), start))
            pos = m.end()
        self.i = 0

    def _error(self, msg: str, offset: int) -> ParseError:
        line = self.text.count("\n", 0, offset) + 1
        col = offset - (self.text.rfind("\n", 0, offset) + 1) + 1
        return ParseError(msg, line, col)

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("eof", "", len(self.text))

    def expect(self, kind, value=None):
        tok = self.peek()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value or kind
            raise self._error(f"expected {want!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def qset(self) -> QSet:
        self.expect("ident", "qset")
        self.expect("punct", "{")
        self.expect("ident", "pure")
        self.expect("punct", ":")
        self.expect("punct", "{")
        pure: dict[Species, int] = {}
        if self.peek()[1] != "}":
            while True:
                name = self.expect("ident")
                self.expect("punct", ":")
                count = self.expect("int")
                if Species(name[1]) in pure:
                    raise self._error(f"duplicate species {name[1]!r}", name[2])
                pure[Species(name[1])] = int(count[1])
                if self.peek()[1] != ",":
                    break
                self.i += 1
        self.expect("punct", "}")
        self.expect("punct", ",")
        self.expect("ident", "classical")
        self.expect("punct", ":")
        self.expect("punct", "[")
        elems = []
        if self.peek()[1] != "]":
            while True:
                tok = self.peek()
                if tok[0] == "str":
                    self.i += 1
                    elems.append(MAtom(json.loads(tok[1])))
                else:
                    nested = self.qset()
                    if not nested.is_set():
                        raise self._error("nested quasi-sets in the classical part may not contain m-atoms", tok[2])
                    elems.append(nested)
                if self.peek()[1] != ",":
                    break
                self.i += 1
        self.expect("punct", "]")
        self.expect("punct", "}")
        return QSet(pure, elems)


def parse_qset(text: str) -> QSet:
    p = _QSetParser(text)
    q = p.qset()
    tok = p.peek()
    if tok[0] != "eof":
        raise p._error(f"trailing input {tok[1]!r}", tok[2])
    return q
