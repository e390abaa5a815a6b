"""Types, terms and formulas of the logic of opaque predicates.

Primitive formulas are built from atoms with negation, implication and the
universal quantifier.  ``And``, ``Or``, ``Iff``, ``Exists`` and ``Eq`` are
sugar removed by :func:`desugar`.  Identity is only defined between terms of
a type other than ``e1``; ``Eq`` refuses e1 operands at construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterator, Union

from ..errors import CaptureError, ClassificationError, IdentityError, TypingError

# -- types -------------------------------------------------------------------


@dataclass(frozen=True)
class BaseType:
    level: int  # 1: m-objects, 2: classical objects

    def __post_init__(self):
        if self.level not in (1, 2):
            raise TypingError(f"no base type e{self.level}")

    def __str__(self) -> str:
        return f"e{self.level}"

    __repr__ = __str__

    @property
    def depth(self) -> int:
        return 0


@dataclass(frozen=True)
class TupleType:
    components: tuple

    def __post_init__(self):
        if not isinstance(self.components, tuple):
            object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise TypingError("relation types need at least one component")
        for c in self.components:
            if not isinstance(c, (BaseType, TupleType)):
                raise TypingError(f"not a type: {c!r}")

    def __str__(self) -> str:
        return "<" + ",".join(map(str, self.components)) + ">"

    __repr__ = __str__

    @property
    def arity(self) -> int:
        return len(self.components)

    @property
    def depth(self) -> int:
        return 1 + max(c.depth for c in self.components)


TypeExpr = Union[BaseType, TupleType]
E1 = BaseType(1)
E2 = BaseType(2)


def tup(*components: TypeExpr) -> TupleType:
    return TupleType(tuple(components))


def leaves(t: TypeExpr) -> Iterator[BaseType]:
    if isinstance(t, BaseType):
        yield t
    else:
        for c in t.components:
            yield from leaves(c)


def opacity_violation(t: TypeExpr) -> str | None:
    """Why ``t`` is not an opaque relation type, or None if it is."""
    if not isinstance(t, TupleType):
        raise ClassificationError(f"{t} is not a relation type")
    for k, comp in enumerate(t.components, 1):
        if E2 in set(leaves(comp)):
            return f"component {k} has leaf e2"
    return None


def is_opaque(t: TypeExpr) -> bool:
    """A relation type whose every component is built from e1 alone."""
    return opacity_violation(t) is None


# -- terms -------------------------------------------------------------------

VAR = "var"
CONST = "const"


@dataclass(frozen=True)
class Term:
    kind: str
    name: str
    type: TypeExpr

    def __post_init__(self):
        if self.kind not in (VAR, CONST):
            raise TypingError(f"unknown term kind {self.kind!r}")

    @property
    def is_var(self) -> bool:
        return self.kind == VAR

    def __str__(self) -> str:
        return f"{self.name}^{self.type}"

    __repr__ = __str__


def Var(name: str, t: TypeExpr) -> Term:
    return Term(VAR, name, t)


def Const(name: str, t: TypeExpr) -> Term:
    return Term(CONST, name, t)


# -- formulas ----------------------------------------------------------------


class Formula:
    """Base class of formula nodes (frozen dataclasses below)."""

    __slots__ = ()

    def __str__(self) -> str:
        from .parser import format_formula
        return format_formula(self)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self})"


@dataclass(frozen=True, repr=False)
class Atom(Formula):
    head: Term
    args: tuple

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        t = self.head.type
        if not isinstance(t, TupleType):
            raise TypingError(f"{self.head} has type {t} and cannot be applied")
        if len(self.args) != t.arity:
            raise TypingError(f"{self.head} expects {t.arity} argument(s), got {len(self.args)}")
        for k, (arg, want) in enumerate(zip(self.args, t.components), 1):
            if arg.type != want:
                raise TypingError(f"argument {k} of {self.head.name} has type {arg.type}, expected {want}")


@dataclass(frozen=True, repr=False)
class Not(Formula):
    body: Formula


@dataclass(frozen=True, repr=False)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Iff(Formula):
    left: Formula
    right: Formula


def _check_binder(var: Term):
    if not isinstance(var, Term) or not var.is_var:
        raise TypingError(f"quantifiers bind variables, not {var!r}")


@dataclass(frozen=True, repr=False)
class Forall(Formula):
    var: Term
    body: Formula

    def __post_init__(self):
        _check_binder(self.var)


@dataclass(frozen=True, repr=False)
class Exists(Formula):
    var: Term
    body: Formula

    def __post_init__(self):
        _check_binder(self.var)


@dataclass(frozen=True, repr=False)
class Eq(Formula):
    left: Term
    right: Term

    def __post_init__(self):
        if self.left.type != self.right.type:
            raise TypingError(f"identity between {self.left.type} and {self.right.type}")
        if self.left.type == E1:
            raise IdentityError()


BINARY = (Implies, And, Or, Iff)
BINDERS = (Forall, Exists)
PRIMITIVE = (Atom, Not, Implies, Forall)


# -- traversal helpers --------------------------------------------------------


def terms_of(f: Formula) -> Iterator[Term]:
    """Every term occurrence, binders included."""
    if isinstance(f, Atom):
        yield f.head
        yield from f.args
    elif isinstance(f, Eq):
        yield f.left
        yield f.right
    elif isinstance(f, Not):
        yield from terms_of(f.body)
    elif isinstance(f, BINARY):
        yield from terms_of(f.left)
        yield from terms_of(f.right)
    elif isinstance(f, BINDERS):
        yield f.var
        yield from terms_of(f.body)
    else:
        raise TypeError(f"not a formula: {f!r}")


def names_of(f: Formula) -> set[str]:
    return {t.name for t in terms_of(f)}


def types_of(f: Formula) -> set[TypeExpr]:
    return {t.type for t in terms_of(f)}


def constants_of(f: Formula) -> set[Term]:
    return {t for t in terms_of(f) if not t.is_var}


def free_variables(f: Formula) -> set[Term]:
    """Variables with at least one occurrence not in the scope of a binder for them."""
    out: set[Term] = set()

    def walk(g: Formula, bound: frozenset):
        if isinstance(g, (Atom, Eq)):
            out.update(t for t in terms_of(g) if t.is_var and t not in bound)
        elif isinstance(g, Not):
            walk(g.body, bound)
        elif isinstance(g, BINARY):
            walk(g.left, bound)
            walk(g.right, bound)
        else:
            walk(g.body, bound | {g.var})

    walk(f, frozenset())
    return out


def is_free_in(v: Term, f: Formula) -> bool:
    return v in free_variables(f)


def is_closed(f: Formula) -> bool:
    return not free_variables(f)


def _term_sort_key(t: Term):
    return (t.name, str(t.type), t.kind)


def universal_closure(f: Formula) -> Formula:
    """Bind the free variables of ``f`` (sorted by name) universally."""
    for v in sorted(free_variables(f), key=_term_sort_key, reverse=True):
        f = Forall(v, f)
    return f


def fresh_name(avoid: set[str], stem: str = "X") -> str:
    for k in itertools.count(1):
        name = f"{stem}{k}"
        if name not in avoid:
            return name
    raise AssertionError("unreachable")


def _rebuild(f: Formula, term: Callable[[Term], Term], sub: Callable[[Formula], Formula]) -> Formula:
    if isinstance(f, Atom):
        return Atom(term(f.head), tuple(term(a) for a in f.args))
    if isinstance(f, Eq):
        return Eq(term(f.left), term(f.right))
    if isinstance(f, Not):
        return Not(sub(f.body))
    if isinstance(f, BINARY):
        return type(f)(sub(f.left), sub(f.right))
    raise TypeError(f"_rebuild does not handle {type(f).__name__}")


# -- substitution --------------------------------------------------------------


def substitute(f: Formula, v: Term, u: Term, mode: str = "strict") -> Formula:
    """Replace the free occurrences of variable ``v`` in ``f`` by ``u``.

    In ``strict`` mode a binder that would capture ``u`` raises
    :class:`CaptureError`; in ``rename`` mode the binder is renamed apart.
    """
    if not v.is_var:
        raise TypingError(f"can only substitute for variables, not {v}")
    if u.type != v.type:
        raise TypingError(f"cannot substitute {u} ({u.type}) for {v} ({v.type})")
    if mode not in ("strict", "rename"):
        raise ValueError(f"unknown substitution mode {mode!r}")
    avoid = names_of(f) | {u.name}

    def term(t: Term) -> Term:
        return u if t == v else t

    def go(g: Formula) -> Formula:
        if isinstance(g, BINDERS):
            w = g.var
            if w == v or v not in free_variables(g.body):
                return g
            if u == w:
                if mode == "strict":
                    raise CaptureError(f"{u} is not free for {v}: it would be captured by the binder of {w.name}")
                new = Var(fresh_name(avoid, w.name), w.type)
                avoid.add(new.name)
                return type(g)(new, go(substitute(g.body, w, new)))
            return type(g)(w, go(g.body))
        return _rebuild(g, term, go)

    return go(f)


def is_free_for(u: Term, v: Term, f: Formula) -> bool:
    try:
        substitute(f, v, u)
    except CaptureError:
        return False
    return True


def rename_bound(f: Formula, stem: str = "V") -> Formula:
    """Rename every bound variable to a fresh name (an alpha-variant of ``f``)."""
    avoid = names_of(f)

    def go(g: Formula) -> Formula:
        if isinstance(g, BINDERS):
            new = Var(fresh_name(avoid, stem), g.var.type)
            avoid.add(new.name)
            return type(g)(new, go(substitute(g.body, g.var, new)))
        return _rebuild(g, lambda t: t, go)

    return go(f)


# -- alpha equivalence ---------------------------------------------------------


def alpha_key(f: Formula, _env: dict | None = None, _depth: int = 0):
    """Hashable key identifying ``f`` up to renaming of bound variables."""
    env = _env or {}

    def tk(t: Term):
        if t in env:
            return ("b", _depth - env[t], t.type)
        return ("f", t.kind, t.name, t.type)

    if isinstance(f, Atom):
        return ("atom", tk(f.head), tuple(tk(a) for a in f.args))
    if isinstance(f, Eq):
        return ("eq", tk(f.left), tk(f.right))
    if isinstance(f, Not):
        return ("not", alpha_key(f.body, env, _depth))
    if isinstance(f, BINARY):
        return (type(f).__name__, alpha_key(f.left, env, _depth), alpha_key(f.right, env, _depth))
    if isinstance(f, BINDERS):
        inner = dict(env)
        inner[f.var] = _depth + 1
        return (type(f).__name__, f.var.type, alpha_key(f.body, inner, _depth + 1))
    raise TypeError(f"not a formula: {f!r}")


def alpha_equal(f: Formula, g: Formula) -> bool:
    return f == g or alpha_key(f) == alpha_key(g)


# -- desugaring ---------------------------------------------------------------


def identity_expansion(left: Term, right: Term, avoid: set[str] | None = None) -> Formula:
    """``forall X^<t> . X(left) <-> X(right)`` with X fresh (still sugared)."""
    Eq(left, right)  # type checks, rejects e1
    avoid = set(avoid or ()) | {left.name, right.name}
    x = Var(fresh_name(avoid), TupleType((left.type,)))
    return Forall(x, Iff(Atom(x, (left,)), Atom(x, (right,))))


def desugar(f: Formula) -> Formula:
    """Rewrite into atoms, negation, implication and universal quantification."""
    avoid = names_of(f)

    def go(g: Formula) -> Formula:
        if isinstance(g, Atom):
            return g
        if isinstance(g, Not):
            return Not(go(g.body))
        if isinstance(g, Implies):
            return Implies(go(g.left), go(g.right))
        if isinstance(g, Forall):
            return Forall(g.var, go(g.body))
        if isinstance(g, And):
            return Not(Implies(go(g.left), Not(go(g.right))))
        if isinstance(g, Or):
            return Implies(Not(go(g.left)), go(g.right))
        if isinstance(g, Iff):
            return go(And(Implies(g.left, g.right), Implies(g.right, g.left)))
        if isinstance(g, Exists):
            return Not(Forall(g.var, Not(go(g.body))))
        if isinstance(g, Eq):
            expansion = identity_expansion(g.left, g.right, avoid)
            avoid.add(expansion.var.name)
            return go(expansion)
        raise TypeError(f"not a formula: {g!r}")

    return go(f)


def is_primitive(f: Formula) -> bool:
    if isinstance(f, Atom):
        return True
    if isinstance(f, Not):
        return is_primitive(f.body)
    if isinstance(f, Implies):
        return is_primitive(f.left) and is_primitive(f.right)
    if isinstance(f, Forall):
        return is_primitive(f.body)
    return False


def contains_eq(f: Formula) -> bool:
    if isinstance(f, Eq):
        return True
    if isinstance(f, Atom):
        return False
    if isinstance(f, Not):
        return contains_eq(f.body)
    if isinstance(f, BINARY):
        return contains_eq(f.left) or contains_eq(f.right)
    return contains_eq(f.body)


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Not):
        yield from subformulas(f.body)
    elif isinstance(f, BINARY):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, BINDERS):
        yield from subformulas(f.body)
