"""Finite frames over a labeled concretization of the pure domain.

Elements of each type are represented concretely:

* ``e1``: atom labels ``1..n`` (hidden; observables are quotiented);
* ``e2``: the tags of the classical domain M;
* ``<t1,...,tn>``: frozensets of n-tuples of elements of the component types.

The species-preserving permutations of the labels act on every type
(identity on ``e2``, componentwise on tuples, elementwise on relations).

Frame kinds:

``standard``
    every relation type holds all relations over its component domains;
``symmetric``
    first-order relation types (all components ``e1``/``e2``) are full,
    every higher-order relation type holds exactly the relations that are
    unions of orbits of the permutation group, so higher-order predicates
    cannot separate indistinguishable arguments;
``custom``
    relation types hold exactly the listed relations.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from ..errors import DomainError, FrameError, SizeError
from ..lang.syntax import E1, E2, BaseType, TupleType, TypeExpr
from ..qset import LabeledConcretization, Species

KINDS = ("standard", "symmetric", "custom")
DEFAULT_BUDGET = 4096
DEFAULT_MAX_DEPTH = 2
PRODUCT_LIMIT = 200_000


def classical_tags(count: int) -> tuple[str, ...]:
    """Default tags ``a, b, c, ...`` for a classical domain of ``count`` elements."""
    letters = "abcdefghijklmnopqrstuvwxyz"
    return tuple(letters[k] if k < 26 else f"m{k}" for k in range(count))


def type_closure(types: Iterable[TypeExpr]) -> list[TypeExpr]:
    """All given types and their components, components first."""
    seen: set[TypeExpr] = set()

    def add(t):
        if t in seen:
            return
        if isinstance(t, TupleType):
            for c in t.components:
                add(c)
        seen.add(t)

    for t in types:
        add(t)
    return sorted(seen, key=lambda t: (t.depth, str(t)))


def elem_key(x):
    """Total order on concrete elements of any type."""
    if isinstance(x, int):
        return (0, x)
    if isinstance(x, str):
        return (1, x)
    return (2, tuple(sorted(tuple(elem_key(c) for c in row) for row in x)))


def apply_perm(perm: Sequence[int], t: TypeExpr, x):
    """Image of element ``x`` of type ``t`` under a label permutation.

    ``perm[k - 1]`` is the image of label ``k``.
    """
    if t == E1:
        return perm[x - 1]
    if t == E2:
        return x
    comps = t.components
    return frozenset(tuple(apply_perm(perm, c, v) for c, v in zip(comps, row)) for row in x)


def is_first_order(t: TupleType) -> bool:
    return all(isinstance(c, BaseType) for c in t.components)


@dataclass(frozen=True)
class FrameSpec:
    """Description of a frame to build.

    ``m`` lists species with their atom counts (in label order), ``M`` the
    classical tags.  ``relations`` is used by custom frames only.
    """

    m: tuple[tuple[str, int], ...] = (("s", 0),)
    M: tuple[str, ...] = ("a",)
    types: tuple[TypeExpr, ...] = ()
    kind: str = "standard"
    relations: Mapping[TypeExpr, tuple] | None = None
    budget: int = DEFAULT_BUDGET
    max_depth: int = DEFAULT_MAX_DEPTH

    @classmethod
    def simple(cls, n_m: int, n_M: int, types: Iterable[TypeExpr] = (), kind: str = "standard",
               **kw) -> "FrameSpec":
        return cls((("s", n_m),), classical_tags(n_M), tuple(types), kind, **kw)


class Frame:
    """Immutable family of finite domains indexed by types."""

    def __init__(self, species: tuple[str, ...], classical: tuple[str, ...], kind: str,
                 domains: Mapping[TypeExpr, tuple], spec: FrameSpec | None = None):
        self.species = species
        self.classical = classical
        self.kind = kind
        self._domains = dict(domains)
        self.spec = spec
        self._member_cache: dict[TypeExpr, frozenset] = {}

    # basic views
    @property
    def n_atoms(self) -> int:
        return len(self.species)

    @property
    def types(self) -> tuple[TypeExpr, ...]:
        return tuple(self._domains)

    @property
    def principal(self) -> bool:
        return self.kind == "standard"

    @cached_property
    def concretization(self) -> LabeledConcretization:
        return LabeledConcretization(tuple(Species(s) for s in self.species))

    def has_type(self, t: TypeExpr) -> bool:
        return t in self._domains

    def domain(self, t: TypeExpr) -> tuple:
        try:
            return self._domains[t]
        except KeyError:
            raise FrameError(f"type {t} is absent from the frame") from None

    def contains(self, t: TypeExpr, x) -> bool:
        members = self._member_cache.get(t)
        if members is None:
            members = self._member_cache[t] = frozenset(self.domain(t))
        return x in members

    def describe(self) -> str:
        counts = ", ".join(f"{s}: {n}" for s, n in self.species_counts())
        return f"{self.kind} frame, m = {{{counts}}}, M = {list(self.classical)}"

    def species_counts(self) -> list[tuple[str, int]]:
        out: list[tuple[str, int]] = []
        for s in self.species:
            if out and out[-1][0] == s:
                out[-1] = (s, out[-1][1] + 1)
            else:
                out.append((s, 1))
        return out

    # group action
    @cached_property
    def group(self) -> tuple[tuple[int, ...], ...]:
        """All species-preserving permutations of the labels."""
        blocks: dict[str, list[int]] = {}
        for label, s in enumerate(self.species, 1):
            blocks.setdefault(s, []).append(label)
        perms = []
        per_block = [list(itertools.permutations(b)) for b in blocks.values()]
        for choice in itertools.product(*per_block):
            perm = [0] * self.n_atoms
            for block, image in zip(blocks.values(), choice):
                for src, dst in zip(block, image):
                    perm[src - 1] = dst
            perms.append(tuple(perm))
        return tuple(perms)

    def identity_perm(self) -> tuple[int, ...]:
        return tuple(range(1, self.n_atoms + 1))

    def random_perm(self, rng: random.Random) -> tuple[int, ...]:
        blocks: dict[str, list[int]] = {}
        for label, s in enumerate(self.species, 1):
            blocks.setdefault(s, []).append(label)
        perm = [0] * self.n_atoms
        for block in blocks.values():
            image = block[:]
            rng.shuffle(image)
            for src, dst in zip(block, image):
                perm[src - 1] = dst
        return tuple(perm)

    def orbit(self, t: TypeExpr, x) -> frozenset:
        return frozenset(apply_perm(p, t, x) for p in self.group)

    def permuted(self, perm: Sequence[int]) -> "Frame":
        """Apply a label permutation to every domain."""
        for k, v in enumerate(perm, 1):
            if self.species[k - 1] != self.species[v - 1]:
                raise DomainError("permutation does not preserve species")
        domains = {t: tuple(apply_perm(perm, t, x) for x in d) for t, d in self._domains.items()}
        return Frame(self.species, self.classical, self.kind, domains, self.spec)

    # atoms <-> names
    def atom_name(self, label: int) -> str:
        s = self.species[label - 1]
        index = sum(1 for k in range(label) if self.species[k] == s)
        return f"{s}.{index}"

    def atom_label(self, name: str) -> int:
        s, _, idx = name.rpartition(".")
        try:
            k = int(idx)
        except ValueError:
            raise FrameError(f"not an atom name: {name!r} (expected species.index)") from None
        labels = [lab for lab, sp in enumerate(self.species, 1) if sp == s]
        if not 1 <= k <= len(labels):
            raise FrameError(f"no atom {name!r} in the frame")
        return labels[k - 1]


# -- construction ------------------------------------------------------------

def _orbits(points: list, comps: tuple, group) -> list[list[int]]:
    index = {p: k for k, p in enumerate(points)}
    seen = [False] * len(points)
    orbits = []
    for k, p in enumerate(points):
        if seen[k]:
            continue
        members = set()
        for perm in group:
            img = tuple(apply_perm(perm, c, v) for c, v in zip(comps, p))
            j = index.get(img)
            if j is None:
                raise FrameError("component domains are not closed under the permutation group")
            members.add(j)
        for j in members:
            seen[j] = True
        orbits.append(sorted(members))
    return orbits


def _unions(blocks: list[frozenset], budget: int, t: TypeExpr) -> tuple:
    # every union of a subfamily of disjoint blocks, ordered by bitmask
    if len(blocks) > 62 or (1 << len(blocks)) > budget:
        raise SizeError(f"domain of {t} would have 2^{len(blocks)} elements (budget {budget})")
    return tuple(frozenset().union(*(b for k, b in enumerate(blocks) if mask >> k & 1))
                 for mask in range(1 << len(blocks)))


def build_frame(spec: FrameSpec) -> Frame:
    """Materialize the domains of ``spec.types`` (and their components)."""
    if spec.kind not in KINDS:
        raise FrameError(f"unknown frame kind {spec.kind!r}")
    if not spec.M:
        raise FrameError("the classical domain M must not be empty")
    if len(set(spec.M)) != len(spec.M):
        raise FrameError("classical tags must be distinct")
    species = tuple(s for s, count in spec.m for _ in range(count))
    if any(c < 0 for _, c in spec.m):
        raise FrameError("species counts must be non-negative")
    frame = Frame(species, tuple(spec.M), spec.kind, {}, spec)
    domains: dict[TypeExpr, tuple] = {E1: tuple(range(1, len(species) + 1)), E2: tuple(spec.M)}
    relations = dict(spec.relations or {})
    for t in type_closure(list(spec.types) + list(relations)):
        if t in domains:
            continue
        if t.depth > spec.max_depth:
            raise SizeError(f"type {t} has depth {t.depth} > bound {spec.max_depth}")
        comp_domains = [domains[c] for c in t.components]
        n_points = math.prod(len(d) for d in comp_domains)
        if spec.kind == "custom":
            if t not in relations:
                raise FrameError(f"custom frame lists no relations of type {t}")
            allowed = set(itertools.product(*comp_domains))
            elems = []
            for r in relations[t]:
                r = frozenset(r)
                if not r <= allowed:
                    raise FrameError(f"relation of type {t} uses tuples outside its component domains")
                if r not in elems:
                    elems.append(r)
            domains[t] = tuple(elems)
            continue
        if spec.kind == "standard" or is_first_order(t):
            if n_points > 62 or (1 << n_points) > spec.budget:
                raise SizeError(f"domain of {t} would have 2^{n_points} elements (budget {spec.budget})")
            points = itertools.product(*comp_domains)
            domains[t] = _unions([frozenset([p]) for p in points], spec.budget, t)
            continue
        if n_points > PRODUCT_LIMIT:
            raise SizeError(f"{n_points} tuples of type {t} exceed the orbit-enumeration limit")
        points = list(itertools.product(*comp_domains))
        orbits = _orbits(points, t.components, frame.group)
        blocks = [frozenset(points[j] for j in orb) for orb in orbits]
        domains[t] = _unions(blocks, spec.budget, t)
    frame._domains = domains
    return frame


def make_frame(n_m: int, n_M: int, types: Iterable[TypeExpr] = (), kind: str = "standard",
               **kw) -> Frame:
    """Single-species frame with ``n_m`` atoms and classical tags ``a, b, ...``."""
    return build_frame(FrameSpec.simple(n_m, n_M, types, kind, **kw))


# -- pseudo-diagonal -----------------------------------------------------------

@dataclass(frozen=True)
class PseudoDiagonal:
    """Pairs of indistinguishable elements of one domain."""

    type: TypeExpr
    pairs: frozenset
    classes: tuple = field(default=())

    def __contains__(self, pair) -> bool:
        return pair in self.pairs

    def __len__(self) -> int:
        return len(self.pairs)


def pseudo_diagonal(frame: Frame, t: TypeExpr) -> PseudoDiagonal:
    """Orbit-equivalence on the domain of ``t`` (literal equality on classical content)."""
    if t == E1:
        raise DomainError("identity undefined at type e1")
    dom = frame.domain(t)
    pairs = set()
    classes = []
    placed = set()
    for a in dom:
        orbit = {b for b in frame.orbit(t, a) if frame.contains(t, b)}
        pairs.update((a, b) for b in orbit)
        if a not in placed:
            placed.update(orbit)
            classes.append(tuple(sorted(orbit, key=elem_key)))
    return PseudoDiagonal(t, frozenset(pairs), tuple(classes))
