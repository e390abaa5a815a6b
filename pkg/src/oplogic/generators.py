"""Seeded random generation of types, quasi-sets, formulas and interpretations."""

from __future__ import annotations

import random
from typing import Sequence

from .lang.syntax import (
    E1, E2, And, Atom, Eq, Exists, Forall, Formula, Iff, Implies, Not, Or,
    Term, TupleType, TypeExpr, Var, Const, fresh_name, names_of,
)
from .model.frames import Frame, FrameSpec, build_frame, classical_tags
from .model.semantics import Interpretation
from .qset import QSet

TYPE_POOL = (
    TupleType((E1,)), TupleType((E2,)), TupleType((E1, E2)), TupleType((E1, E1)),
    TupleType((TupleType((E1,)),)),
)

CONSTANT_POOL = (
    Const("P", TupleType((E1,))), Const("Q", TupleType((E1, E2))), Const("R", TupleType((E1, E1))),
    Const("S", TupleType((E2,))), Const("c", E1), Const("a", E2),
    Const("K", TupleType((TupleType((E1,)),))),
)


def random_type(rng: random.Random, max_depth: int = 3, max_arity: int = 3, p_base: float = 0.4) -> TypeExpr:
    if max_depth == 0 or rng.random() < p_base:
        return rng.choice((E1, E2))
    n = rng.randint(1, max_arity)
    return TupleType(tuple(random_type(rng, max_depth - 1, max_arity, p_base + 0.2) for _ in range(n)))


def random_qset(rng: random.Random, species: Sequence[str] = ("s", "t"), max_mult: int = 4,
                tags: Sequence[str] = ("a", "b", "c"), nested: bool = True) -> QSet:
    pure = {s: rng.randint(0, max_mult) for s in species if rng.random() < 0.8}
    classical: list = [t for t in tags if rng.random() < 0.4]
    if nested and rng.random() < 0.3:
        classical.append(QSet({}, [t for t in tags if rng.random() < 0.5]))
    return QSet(pure, classical)


# -- formulas -----------------------------------------------------------------

class _FormulaGen:
    def __init__(self, rng: random.Random, types: Sequence[TypeExpr], constants: Sequence[Term],
                 p_eq: float):
        self.rng = rng
        self.rel_types = [t for t in types if isinstance(t, TupleType)]
        self.constants = list(constants)
        self.p_eq = p_eq
        self.used: set[str] = {c.name for c in constants}

    def fresh(self, t: TypeExpr) -> Term:
        stem = "x" if t == E1 else "w" if t == E2 else "X"
        name = fresh_name(self.used, stem)
        self.used.add(name)
        return Var(name, t)

    def term(self, t: TypeExpr, scope: list[Term], pending: list[Term]) -> Term:
        pool = [v for v in scope if v.type == t] + [c for c in self.constants if c.type == t]
        if pool and self.rng.random() < 0.85:
            return self.rng.choice(pool)
        v = self.fresh(t)
        pending.append(v)
        return v

    def wrap(self, body: Formula, pending: list[Term]) -> Formula:
        for v in reversed(pending):
            body = (Forall if self.rng.random() < 0.5 else Exists)(v, body)
        return body

    def leaf(self, scope: list[Term]) -> Formula:
        pending: list[Term] = []
        eq_types = sorted({v.type for v in scope + self.constants if v.type != E1}, key=str)
        if eq_types and self.rng.random() < self.p_eq:
            t = self.rng.choice(eq_types)
            body = Eq(self.term(t, scope, pending), self.term(t, scope, pending))
            return self.wrap(body, pending)
        r = self.rng.choice(self.rel_types)
        head = self.term(r, scope, pending)
        args = tuple(self.term(c, scope, pending) for c in r.components)
        return self.wrap(Atom(head, args), pending)

    def formula(self, depth: int, scope: list[Term]) -> Formula:
        if depth <= 0 or self.rng.random() < 0.2:
            return self.leaf(scope)
        op = self.rng.choice(("not", "imp", "and", "or", "iff", "all", "ex", "all"))
        if op == "not":
            return Not(self.formula(depth - 1, scope))
        if op in ("imp", "and", "or", "iff"):
            cls = {"imp": Implies, "and": And, "or": Or, "iff": Iff}[op]
            return cls(self.formula(depth - 1, scope), self.formula(depth - 1, scope))
        t = self.rng.choice([E1, E2] + self.rel_types)
        v = self.fresh(t)
        return (Forall if op == "all" else Exists)(v, self.formula(depth - 1, scope + [v]))


def random_formula(rng: random.Random, types: Sequence[TypeExpr] = TYPE_POOL,
                   constants: Sequence[Term] = (), depth: int = 4, free: Sequence[Term] = (),
                   p_eq: float = 0.1) -> Formula:
    """A random well-typed formula.

    Quantified variables range over ``e1``, ``e2`` and ``types``; every
    variable is bound except those listed in ``free``.
    """
    gen = _FormulaGen(rng, types, constants, p_eq)
    gen.used |= {v.name for v in free}
    return gen.formula(depth, list(free))


def random_frame(rng: random.Random, max_nm: int = 3, max_M: int = 2,
                 types: Sequence[TypeExpr] = TYPE_POOL, kinds: Sequence[str] = ("standard", "symmetric"),
                 species: bool = True) -> Frame:
    nm = rng.randint(1, max_nm)
    if species and nm > 1 and rng.random() < 0.3:
        k = rng.randint(1, nm - 1)
        m = (("s", k), ("t", nm - k))
    else:
        m = (("s", nm),)
    return build_frame(FrameSpec(m, classical_tags(rng.randint(1, max_M)), tuple(types), rng.choice(kinds)))


def random_interpretation(rng: random.Random, frame: Frame, constants: Sequence[Term]) -> Interpretation:
    return Interpretation(frame, {c: rng.choice(frame.domain(c.type)) for c in constants})


def constants_for(frame: Frame, pool: Sequence[Term] = CONSTANT_POOL) -> list[Term]:
    return [c for c in pool if frame.has_type(c.type)]


__all__ = [
    "CONSTANT_POOL", "TYPE_POOL", "constants_for", "random_formula", "random_frame",
    "random_interpretation", "random_qset", "random_type",
]
