"""Satisfaction, truth and bounded validity over finite frames."""

from __future__ import annotations

import itertools
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from ..errors import ClassificationError, DomainError, FrameError, SizeError
from ..lang.syntax import (
    E1, And, Atom, Eq, Exists, Forall, Formula, Iff, Implies, Not, Or, Term,
    TupleType, constants_of, desugar, free_variables, opacity_violation,
    types_of,
)
from ..qset import QSet, quotient
from .frames import (
    DEFAULT_BUDGET, Frame, FrameSpec, apply_perm, build_frame, classical_tags,
    elem_key, pseudo_diagonal,
)

Env = dict
Valuation = Mapping[Term, object]

DEFAULT_DENOTATION_BUDGET = 200_000


@dataclass(frozen=True)
class Interpretation:
    """A frame together with a denotation of constants."""

    frame: Frame
    denotation: Mapping[Term, object] = field(default_factory=dict)

    def __post_init__(self):
        den = dict(self.denotation)
        for c, x in den.items():
            if c.is_var:
                raise FrameError(f"{c} is a variable, not a constant")
            if not self.frame.contains(c.type, x):
                raise FrameError(f"denotation of {c} is not in the domain of {c.type}")
        object.__setattr__(self, "denotation", den)

    @property
    def principal(self) -> bool:
        return self.frame.principal

    def permuted(self, perm: Sequence[int]) -> "Interpretation":
        """Relabel the frame and every denoted element simultaneously."""
        return Interpretation(self.frame.permuted(perm),
                              {c: apply_perm(perm, c.type, x) for c, x in self.denotation.items()})


# -- compilation ---------------------------------------------------------------

def compile_formula(frame: Frame, f: Formula) -> Callable[[Env], bool]:
    """Translate ``f`` to a closure over a mutable environment Term -> element.

    Quantifiers range over the full domain of the bound variable's type.
    Eq nodes are read through the pseudo-diagonal.
    """
    if isinstance(f, Atom):
        head, args = f.head, f.args
        if len(args) == 1:
            a0 = args[0]
            return lambda env: (env[a0],) in env[head]
        return lambda env: tuple(env[a] for a in args) in env[head]
    if isinstance(f, Not):
        body = compile_formula(frame, f.body)
        return lambda env: not body(env)
    if isinstance(f, (Implies, And, Or, Iff)):
        left = compile_formula(frame, f.left)
        right = compile_formula(frame, f.right)
        if isinstance(f, Implies):
            return lambda env: (not left(env)) or right(env)
        if isinstance(f, And):
            return lambda env: left(env) and right(env)
        if isinstance(f, Or):
            return lambda env: left(env) or right(env)
        return lambda env: left(env) == right(env)
    if isinstance(f, (Forall, Exists)):
        var, dom = f.var, frame.domain(f.var.type)
        body = compile_formula(frame, f.body)
        want = isinstance(f, Exists)

        def quant(env):
            saved = env.get(var, _MISSING)
            try:
                for x in dom:
                    env[var] = x
                    if body(env) == want:
                        return want
                return not want
            finally:
                if saved is _MISSING:
                    env.pop(var, None)
                else:
                    env[var] = saved
        return quant
    if isinstance(f, Eq):
        pairs = pseudo_diagonal(frame, f.left.type).pairs
        left, right = f.left, f.right
        return lambda env: (env[left], env[right]) in pairs
    raise TypeError(f"not a formula: {f!r}")


_MISSING = object()


def _check_types(frame: Frame, f: Formula):
    for t in types_of(f):
        frame.domain(t)


def _environment(i: Interpretation, v: Valuation, f: Formula) -> Env:
    env = dict(i.denotation)
    for var, x in v.items():
        if not i.frame.contains(var.type, x):
            raise FrameError(f"value of {var} is not in the domain of {var.type}")
        env[var] = x
    for t in free_variables(f) | constants_of(f):
        if t not in env:
            raise FrameError(f"no value for {t}")
    return env


def satisfies(i: Interpretation, v: Valuation, f: Formula) -> bool:
    _check_types(i.frame, f)
    return compile_formula(i.frame, f)(_environment(i, v, f))


def valuations(frame: Frame, variables: Iterable[Term]):
    """All assignments of domain elements to ``variables`` (sorted by name)."""
    vs = sorted(variables, key=lambda t: (t.name, str(t.type)))
    for combo in itertools.product(*(frame.domain(t.type) for t in vs)):
        yield dict(zip(vs, combo))


def refuting_valuation(i: Interpretation, f: Formula, orbit_variants: bool = True) -> dict | None:
    """First valuation (including orbit variants of constants) falsifying ``f``."""
    _check_types(i.frame, f)
    fn = compile_formula(i.frame, f)
    frame = i.frame
    consts = sorted(constants_of(f), key=lambda t: (t.name, str(t.type)))
    for c in consts:
        if c not in i.denotation:
            raise FrameError(f"no value for {c}")
    if orbit_variants:
        variants = [sorted(frame.orbit(c.type, i.denotation[c]), key=elem_key) for c in consts]
    else:
        variants = [[i.denotation[c]] for c in consts]
    for cvals in itertools.product(*variants):
        env = dict(i.denotation)
        env.update(zip(consts, cvals))
        for v in valuations(frame, free_variables(f)):
            env.update(v)
            if not fn(env):
                out = dict(zip(consts, cvals)) if orbit_variants else {}
                out.update(v)
                return out
    return None


def is_true(i: Interpretation, f: Formula, orbit_variants: bool = True) -> bool:
    """Truth: satisfaction under every valuation.

    Valuations may move each constant to any member of the orbit of its
    denotation.  ``orbit_variants=False`` holds constants at their
    denotations.
    """
    return refuting_valuation(i, f, orbit_variants) is None


# -- invariance and classification ---------------------------------------------

def _plain_truth(i: Interpretation, f: Formula) -> bool:
    # truth with constants held at their denotations
    if free_variables(f):
        return is_true(i, f, orbit_variants=False)
    return satisfies(i, {}, f)


@dataclass
class InvarianceReport:
    trials: int
    failures: int
    seed: int | None
    failing_perms: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failures == 0


def permutation_invariance_report(i: Interpretation, f: Formula, trials: int = 20,
                                  seed: int | None = 0, rng: random.Random | None = None) -> InvarianceReport:
    rng = rng or random.Random(seed)
    base = _plain_truth(i, f)
    report = InvarianceReport(trials, 0, seed)
    for _ in range(trials):
        perm = i.frame.random_perm(rng)
        if _plain_truth(i.permuted(perm), f) != base:
            report.failures += 1
            report.failing_perms.append(perm)
    return report


def permutation_invariance_check(i: Interpretation, f: Formula, trials: int = 20,
                                 seed: int | None = 0) -> bool:
    """True iff relabeling frame and denotation never changes the truth of ``f``."""
    return permutation_invariance_report(i, f, trials, seed).ok


def veiled_extension(i: Interpretation, p: Term) -> QSet:
    """Quotient of the labeled extension of an opaque unary predicate."""
    t = p.type
    if not isinstance(t, TupleType):
        raise ClassificationError(f"{p} is not a predicate (type {t})")
    why = opacity_violation(t)
    if why:
        raise ClassificationError(f"{p} is not an opaque predicate: {why}")
    if t.components != (E1,):
        raise DomainError(f"veiled extensions are defined for type <e1> only, not {t}")
    if p not in i.denotation:
        raise FrameError(f"no value for {p}")
    labels = [row[0] for row in i.denotation[p]]
    return quotient(i.frame.concretization, labels, ())


# -- bounded validity ----------------------------------------------------------

@dataclass
class Counterexample:
    frame: Frame
    denotation: dict
    valuation: dict

    @property
    def interpretation(self) -> Interpretation:
        return Interpretation(self.frame, self.denotation)


@dataclass
class ValidityReport:
    formula: Formula
    kind: str
    bounds: dict
    counterexample: Counterexample | None = None
    frames_checked: int = 0
    interpretations_checked: int = 0
    valuations_checked: int = 0
    skipped_non_normal: int = 0
    skipped_premises: int = 0
    skipped_frames: list = field(default_factory=list)
    incomplete: bool = False
    elapsed: float = 0.0

    @property
    def holds(self) -> bool:
        return self.counterexample is None

    @property
    def verdict(self) -> str:
        return "no-counterexample" if self.holds else "counterexample"


def frame_specs(max_nm: int, max_M: int, types, kind: str, max_depth: int, budget: int,
                min_nm: int = 1, species_splits: bool = False) -> list[FrameSpec]:
    """Frame descriptions enumerated by bounded validity, smallest first."""
    out = []
    for nm in range(min_nm, max_nm + 1):
        splits = _partitions(nm) if species_splits and nm else [(nm,)]
        for split in splits:
            m = tuple((("s", "t", "u", "v")[k] if k < 4 else f"s{k}", c) for k, c in enumerate(split))
            for nM in range(1, max_M + 1):
                out.append(FrameSpec(m, classical_tags(nM), tuple(types), kind,
                                     budget=budget, max_depth=max_depth))
    return out


def _partitions(n: int, largest: int | None = None) -> list[tuple[int, ...]]:
    largest = n if largest is None else largest
    if n == 0:
        return [()]
    out = []
    for k in range(min(n, largest), 0, -1):
        out.extend((k,) + rest for rest in _partitions(n - k, k))
    return out


@dataclass
class _UnitResult:
    index: int
    counterexample: Counterexample | None = None
    interpretations: int = 0
    valuations: int = 0
    non_normal: int = 0
    premises: int = 0
    skipped: str | None = None
    incomplete: bool = False


def _check_unit(args) -> _UnitResult:
    index, spec, f, premises, normal, den_budget = args
    res = _UnitResult(index)
    try:
        frame = build_frame(spec)
    except SizeError as exc:
        res.skipped = str(exc)
        res.incomplete = True
        return res
    fn = compile_formula(frame, f)
    prem_fns = [(compile_formula(frame, g), sorted(free_variables(g), key=str)) for g in premises]
    norm_fns = [(compile_formula(frame, g), sorted(free_variables(g), key=str)) for g in normal]
    consts = sorted(set().union(constants_of(f), *(constants_of(g) for g in list(premises) + list(normal))),
                    key=lambda t: (t.name, str(t.type)))
    fvars = sorted(free_variables(f), key=lambda t: (t.name, str(t.type)))
    fdoms = [frame.domain(v.type) for v in fvars]

    def all_true(env, checks):
        for g, gvars in checks:
            for combo in itertools.product(*(frame.domain(v.type) for v in gvars)):
                env.update(zip(gvars, combo))
                if not g(env):
                    return False
        return True

    for cvals in itertools.product(*(frame.domain(c.type) for c in consts)):
        if res.interpretations >= den_budget:
            res.incomplete = True
            break
        env = dict(zip(consts, cvals))
        if norm_fns and not all_true(env, norm_fns):
            res.non_normal += 1
            continue
        if prem_fns and not all_true(env, prem_fns):
            res.premises += 1
            continue
        res.interpretations += 1
        for combo in itertools.product(*fdoms):
            env.update(zip(fvars, combo))
            res.valuations += 1
            if not fn(env):
                res.counterexample = Counterexample(frame, dict(zip(consts, cvals)), dict(zip(fvars, combo)))
                return res
    return res


def bounded_validity(f: Formula, max_nm: int = 3, max_M: int = 2, max_depth: int = 2,
                     kind: str = "symmetric", premises: Sequence[Formula] = (),
                     normal_instances: Sequence[Formula] = (), min_nm: int = 1,
                     budget: int = DEFAULT_BUDGET, denotation_budget: int = DEFAULT_DENOTATION_BUDGET,
                     species_splits: bool = False, workers: int = 1) -> ValidityReport:
    """Search all frames of ``kind`` within the bounds for a counterexample.

    Identity is evaluated through its Leibniz expansion.  Interpretations
    falsifying a ``normal_instances`` formula (non-normal) or a premise are
    skipped.  Frames whose domains exceed ``budget`` are skipped and the
    report is flagged incomplete.
    """
    start = time.perf_counter()
    g = desugar(f)
    prem = [desugar(p) for p in premises]
    norm = [desugar(n) for n in normal_instances]
    types = set(types_of(g)).union(*(types_of(p) for p in prem + norm))
    specs = frame_specs(max_nm, max_M, sorted(types, key=str), kind, max_depth, budget, min_nm, species_splits)
    report = ValidityReport(f, kind, {"max_nm": max_nm, "max_M": max_M, "max_depth": max_depth,
                                           "min_nm": min_nm, "budget": budget})
    units = [(k, spec, g, prem, norm, denotation_budget) for k, spec in enumerate(specs)]
    if workers > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_check_unit, units))
    else:
        results = []
        for u in units:
            results.append(_check_unit(u))
            if results[-1].counterexample is not None:
                break
    for res in sorted(results, key=lambda r: r.index):
        spec = specs[res.index]
        if res.skipped is not None:
            report.skipped_frames.append((_spec_label(spec), res.skipped))
        else:
            report.frames_checked += 1
        report.interpretations_checked += res.interpretations
        report.valuations_checked += res.valuations
        report.skipped_non_normal += res.non_normal
        report.skipped_premises += res.premises
        report.incomplete |= res.incomplete
        if res.counterexample is not None:
            report.counterexample = res.counterexample
            break
    report.elapsed = time.perf_counter() - start
    return report


def _spec_label(spec: FrameSpec) -> str:
    m = ", ".join(f"{s}: {c}" for s, c in spec.m)
    return f"m = {{{m}}}, |M| = {len(spec.M)}"
