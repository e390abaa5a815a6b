"""Desk-scale acceptance checks.

Each ``check_*`` function runs one property exhaustively or on a seeded
sample and returns a :class:`CheckResult`.  The oracles here are written
independently of the code they test (plain enumeration, no shared helpers
beyond the public API under test).
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import OpLogicError
from .generators import constants_for, random_formula, random_frame, random_interpretation, random_qset
from .lang.parser import parse_formula
from .lang.syntax import (
    E1, E2, Atom, Const, Eq, Implies, Not, TupleType, TypeExpr, Var, constants_of, desugar,
    free_variables, is_opaque, opacity_violation, types_of, universal_closure,
)
from .model.frames import FrameSpec, _orbits, build_frame, classical_tags, is_first_order, pseudo_diagonal
from .model.semantics import Interpretation, bounded_validity, compile_formula, satisfies
from .proof import (
    Justification, Proof, ProofLine, check_proof, is_tautology_instance, load_proof,
)
from .qset import QSet, concretize, indist, permute_exchange, power_profile, quotient

CORPUS = Path(__file__).resolve().parents[2] / "corpus"


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    detail: str
    elapsed: float = 0.0
    limit: float | None = None
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        limit = f" (limit {self.limit:g} s)" if self.limit else ""
        return f"[{status}] {self.number}. {self.title}: {self.detail}; {self.elapsed:.2f} s{limit}"


def _timed(number: int, title: str, limit: float | None, body: Callable[[], tuple[bool, str, dict]]) -> CheckResult:
    start = time.perf_counter()
    ok, detail, data = body()
    elapsed = time.perf_counter() - start
    if limit is not None and elapsed > limit:
        ok = False
        detail += f"; exceeded time limit {limit:g} s"
    return CheckResult(number, title, ok, detail, elapsed, limit, data)


# -- 1: power profile --------------------------------------------------------------

def _labeled_subset_counts(n: int) -> list[int]:
    counts = [0] * (n + 1)
    for mask in range(1 << n):
        counts[bin(mask).count("1")] += 1
    return counts


def check_power_profile(max_n: int = 12) -> CheckResult:
    def body():
        bad = []
        for n in range(max_n + 1):
            prof = power_profile(QSet({"s": n}))
            oracle = _labeled_subset_counts(n)
            if prof.total() != 2 ** n:
                bad.append(f"n={n}: total {prof.total()}")
            for k in range(n + 1):
                if prof[QSet({"s": k} if k else {})] != oracle[k] or oracle[k] != math.comb(n, k):
                    bad.append(f"n={n}, k={k}")
        return not bad, f"n = 0..{max_n}, {len(bad)} mismatches", {"mismatches": bad}
    return _timed(1, "power-qset multiplicities", 1.0, body)


# -- 2: unobservability of permutations -------------------------------------------------

def check_permutations(seed: int = 0, exchanges: int = 1000, triples: int = 500) -> CheckResult:
    def body():
        rng = random.Random(seed)
        ex_fail = 0
        done = 0
        while done < exchanges:
            q = random_qset(rng, nested=False)
            c = concretize(q)
            labels = list(c.labels)
            if len(labels) < 2:
                continue
            realized = frozenset(k for k in labels if rng.random() < 0.5)
            c = c.with_realized(realized)
            i = rng.choice(labels)
            mates = [j for j in labels if c.same_species(i, j)]
            j = rng.choice(mates)
            after, same = permute_exchange(c, i, j)
            moved = after.realized[0][0]
            if not (same and indist(quotient(c, realized, ()), quotient(after, moved, ()))):
                ex_fail += 1
            done += 1
        tr_fail = 0
        for k in range(triples):
            frame = random_frame(rng)
            consts = constants_for(frame)
            f = random_formula(rng, constants=consts, depth=4)
            interp = random_interpretation(rng, frame, consts)
            perm = frame.random_perm(rng)
            before = satisfies(interp, {}, f)
            after_i = interp.permuted(perm)
            if satisfies(after_i, {}, f) != before:
                tr_fail += 1
        ok = ex_fail == 0 and tr_fail == 0
        return ok, (f"{exchanges} exchanges ({ex_fail} failures), {triples} relabeled triples "
                    f"({tr_fail} failures), seed {seed}"), {"exchange_failures": ex_fail, "triple_failures": tr_fail}
    return _timed(2, "unobservability of permutations", 30.0, body)


# -- 3: proof corpus and mutants ----------------------------------------------------------

def corpus_proofs(corpus: Path = CORPUS) -> list[Proof]:
    return [load_proof(p) for p in sorted(Path(corpus).glob("*.prf"))]


_AXIOM_CYCLE = {"A1": "A2", "A2": "A3", "A3": "A4", "A4": "CHOICE", "CHOICE": "A1"}


def mutants(proof: Proof) -> list[tuple[str, Proof]]:
    """Single-line mutations that break the line by construction.

    ``neg`` negates the formula; ``rule`` swaps the justification for one
    that cannot apply; ``ref`` points a reference at the line itself.
    """
    out = []
    for k, line in enumerate(proof.lines):
        j = line.justification

        def with_line(new: ProofLine, tag: str):
            lines = list(proof.lines)
            lines[k] = new
            out.append((f"{proof.name}:{k + 1}:{tag}", Proof(proof.premises, tuple(lines), proof.name)))

        with_line(ProofLine(Not(line.formula), j, line.source_line), "neg")
        if j.rule in _AXIOM_CYCLE:
            new = Justification(_AXIOM_CYCLE[j.rule])
        elif j.rule == "PREM":
            new = Justification("PREM", (len(proof.premises) + 1,))
        elif j.rule == "MP":
            new = Justification("MP", (j.refs[1], j.refs[0]))
        elif j.rule == "GEN":
            new = Justification("GEN", j.refs, "unused_variable", None)
            target = proof.lines[j.refs[0] - 1].formula
            if Var(j.var, j.var_type or line.formula.var.type) not in free_variables(target):
                new = Justification("MP", (j.refs[0], j.refs[0]))
        else:
            new = Justification("A1") if not is_tautology_instance(line.formula) else Justification("A2")
        with_line(ProofLine(line.formula, new, line.source_line), "rule")
        if j.refs and j.rule != "PREM":
            refs = (k + 1,) + j.refs[1:]
            with_line(ProofLine(line.formula, Justification(j.rule, refs, j.var, j.var_type),
                                line.source_line), "ref")
    return out


def check_corpus(corpus: Path = CORPUS) -> CheckResult:
    def body():
        proofs = corpus_proofs(corpus)
        rejected = [p.name for p in proofs if not check_proof(p).accepted]
        kinds = {ln.justification.rule for p in proofs for ln in p.lines}
        missing = sorted({"A1", "A2", "A3", "A4", "CHOICE", "PREM", "MP", "GEN", "DEFEQ"} - kinds)
        muts = [m for p in proofs for m in mutants(p)]
        survivors = [name for name, m in muts if check_proof(m).accepted]
        ok = len(proofs) >= 20 and not rejected and not missing and len(muts) >= 100 and not survivors
        detail = (f"{len(proofs)} proofs, {len(rejected)} rejected, missing kinds {missing or 'none'}; "
                  f"{len(muts)} mutants, {len(survivors)} accepted")
        return ok, detail, {"rejected": rejected, "survivors": survivors}
    return _timed(3, "proof corpus and mutations", 10.0, body)


# -- 4: empirical soundness ---------------------------------------------------------------

def check_soundness(corpus: Path = CORPUS, bounds=(3, 2, 2), kind: str = "symmetric",
                    workers: int = 1) -> CheckResult:
    def body():
        failures, incomplete, checked = [], [], 0
        for p in corpus_proofs(corpus):
            normal = p.axiom_instances(("A4",))
            for k, line in enumerate(p.lines, 1):
                r = bounded_validity(line.formula, *bounds, kind=kind, premises=p.premises,
                                     normal_instances=normal, workers=workers)
                checked += 1
                if not r.holds:
                    failures.append(f"{p.name}:{k}")
                if r.incomplete:
                    incomplete.append(f"{p.name}:{k}")
        ok = not failures and not incomplete
        return ok, (f"{checked} proof lines at bounds {bounds} {kind}: {len(failures)} counterexamples, "
                    f"{len(incomplete)} incomplete"), {"failures": failures, "incomplete": incomplete}
    return _timed(4, "empirical soundness", 300.0, body)


# -- 5: identity semantics ------------------------------------------------------------------

IDENTITY_TYPES = (
    E2, TupleType((E1,)), TupleType((E2,)), TupleType((E1, E1)), TupleType((E1, E2)),
    TupleType((E2, E2)), TupleType((TupleType((E1,)),)),
)


MASK_LIMIT = 22


def _leibniz_by_masks(spec: FrameSpec, t) -> tuple[dict, frozenset] | None:
    """Leibniz identity on the domain of ``t`` when ``<t>`` is too big to build.

    Elements of ``<t>`` are unions of blocks (orbits, or single tuples where
    the domain is full), so each one is a bitmask over the blocks.  All masks
    are enumerated; two elements are identified iff every mask agrees on them.
    """
    frame = build_frame(FrameSpec(spec.m, spec.M, (t,), spec.kind, budget=spec.budget,
                                  max_depth=spec.max_depth))
    rel = TupleType((t,))
    points = [(x,) for x in frame.domain(t)]
    if spec.kind == "standard" or is_first_order(rel):
        blocks = [[k] for k in range(len(points))]
    else:
        blocks = _orbits(points, rel.components, frame.group)
    if len(blocks) > MASK_LIMIT:
        return None
    block_of = np.empty(len(points), dtype=np.int64)
    for j, orb in enumerate(blocks):
        block_of[orb] = j
    masks = np.arange(1 << len(blocks), dtype=np.int64)
    # column k is the truth value of X(x_k) for every X; equal columns = Leibniz-identified
    member = ((masks[:, None] >> block_of[None, :]) & 1).astype(np.uint8)
    columns = [np.packbits(member[:, k]).tobytes() for k in range(len(points))]
    dom = frame.domain(t)
    leib = frozenset((a, b) for i, a in enumerate(dom) for j, b in enumerate(dom) if columns[i] == columns[j])
    return {"frame": frame, "dom": dom}, leib


def check_identity(max_nm: int = 3, max_M: int = 2, budget: int = 4096) -> CheckResult:
    def body():
        cases, by_mask, skipped, wrong = 0, 0, [], []
        for kind in ("standard", "symmetric"):
            for nm in range(0, max_nm + 1):
                for nM in range(1, max_M + 1):
                    for t in IDENTITY_TYPES:
                        label = f"{kind} n={nm} M={nM} {t}"
                        spec = FrameSpec((("s", nm),), classical_tags(nM), (t, TupleType((t,))),
                                         kind, budget=budget, max_depth=3)
                        try:
                            frame = build_frame(spec)
                        except OpLogicError as exc:
                            found = _leibniz_by_masks(spec, t)
                            if found is None:
                                skipped.append(f"{label}: {exc}")
                                continue
                            info, leib = found
                            frame, dom = info["frame"], info["dom"]
                            pd = pseudo_diagonal(frame, t).pairs
                            want = pd if kind == "symmetric" else frozenset((a, a) for a in dom)
                            if leib != want:
                                wrong.append(label)
                            cases += 1
                            by_mask += 1
                            continue
                        u, v = Var("U", t), Var("V", t)
                        fn = compile_formula(frame, desugar(Eq(u, v)))
                        pd = pseudo_diagonal(frame, t).pairs
                        for a in frame.domain(t):
                            for b in frame.domain(t):
                                want = (a, b) in pd if kind == "symmetric" else a == b
                                if fn({u: a, v: b}) != want:
                                    wrong.append(label)
                        cases += 1
        return not wrong, (f"{cases} (frame, type) cases exact ({by_mask} by mask enumeration), "
                           f"{len(wrong)} disagreements, {len(skipped)} beyond 2^{MASK_LIMIT} relations"), \
            {"skipped": skipped, "wrong": wrong}
    return _timed(5, "identity semantics", 60.0, body)


# -- 6: duality results -----------------------------------------------------------------

DUALITY_BATTERY = (
    "P^<e1>(x^e1) -> P(x)",
    "forall x^e1 . P^<e1>(x)",
    "exists x^e1 . P^<e1>(x)",
    "(forall x^e1 . P^<e1>(x)) -> exists x^e1 . P(x)",
    "P^<e1>(x^e1)",
    "P^<e1>(x^e1) & !P(y^e1)",
    "P^<e1>(x^e1) | !P(x)",
    "exists Z^<e1> . forall x^e1 . Z(x) <-> P^<e1>(x)",
    "forall X^<e1> . exists y^e1 . X(y)",
    "exists X^<e1> . forall y^e1 . X(y)",
    "a^e2 = b^e2",
    "w^e2 = w",
    "X^<e1> = Y^<e1>",
    "forall X^<e1> . forall Y^<e1> . (forall z^e1 . X(z) <-> Y(z)) -> X = Y",
    "forall X^<e1> . forall Y^<e1> . X = Y -> (forall z^e1 . X(z) <-> Y(z))",
    "Q^<e1,e2>(x^e1, w^e2) -> exists v^e2 . Q(x, v)",
    "exists x^e1 . exists y^e1 . P^<e1>(x) & !P(y)",
    "forall x^e1 . forall y^e1 . R^<e1,e1>(x, y) -> R(y, x)",
    "(exists x^e1 . forall y^e1 . R^<e1,e1>(x, y)) -> forall y^e1 . exists x^e1 . R(x, y)",
    "(forall y^e1 . exists x^e1 . R^<e1,e1>(x, y)) -> exists x^e1 . forall y^e1 . R(x, y)",
    "S^<e2>(a^e2) -> exists w^e2 . S(w)",
    "forall w^e2 . S^<e2>(w) | !S(w)",
    "K^<<e1>>(X^<e1>) -> K(X)",
    "exists X^<e1> . K^<<e1>>(X)",
    "P^<e1>(c^e1) -> exists x^e1 . P(x)",
    "P^<e1>(c^e1) <-> P(d^e1)",
    "!(P^<e1>(x^e1) -> P(x))",
    "forall w^e2 . forall v^e2 . w = v",
    "exists w^e2 . forall v^e2 . v = w",
    "(forall x^e1 . P^<e1>(x) -> Q^<e1>(x)) -> ((exists x^e1 . P(x)) -> exists x^e1 . Q(x))",
)


def _interpretations(f, kinds, max_nm, max_M):
    """Every (frame, denotation) within bounds, for the types of ``f``."""
    types = sorted(types_of(f), key=str)
    consts = sorted(constants_of(f), key=lambda c: c.name)
    for kind in kinds:
        for nm in range(1, max_nm + 1):
            for nM in range(1, max_M + 1):
                frame = build_frame(FrameSpec((("s", nm),), classical_tags(nM), tuple(types), kind))
                for vals in itertools.product(*(frame.domain(c.type) for c in consts)):
                    yield Interpretation(frame, dict(zip(consts, vals)))


def _truth_profile(i: Interpretation, f) -> tuple[bool, bool]:
    """(true under every valuation, satisfied by some valuation) by plain enumeration."""
    fn = compile_formula(i.frame, f)
    fv = sorted(free_variables(f), key=lambda v: v.name)
    results = [fn({**i.denotation, **dict(zip(fv, vals))})
               for vals in itertools.product(*(i.frame.domain(v.type) for v in fv))]
    return all(results), any(results)


def check_duality(max_nm: int = 2, max_M: int = 2) -> CheckResult:
    classes = {"principal": ("standard",), "secondary": ("standard", "symmetric")}

    def body():
        bad = []
        summary = {"principal": [0, 0], "secondary": [0, 0]}
        for text in DUALITY_BATTERY:
            f = desugar(parse_formula(text))
            nf = Not(f)
            closure = universal_closure(f)
            for cname, kinds in classes.items():
                valid, sat, neg_valid, neg_sat = True, False, True, False
                for i in _interpretations(f, kinds, max_nm, max_M):
                    t, s = _truth_profile(i, f)
                    nt, ns = _truth_profile(i, nf)
                    ct, _ = _truth_profile(i, closure)
                    valid &= t
                    sat |= s
                    neg_valid &= nt
                    neg_sat |= ns
                    if t != ct:
                        bad.append(f"{text}: closure disagrees ({cname})")
                if valid == neg_sat:
                    bad.append(f"{text}: valid vs negation satisfiable ({cname})")
                if sat == neg_valid:
                    bad.append(f"{text}: satisfiable vs negation valid ({cname})")
                engine = all(bounded_validity(f, max_nm, max_M, 2, kind).holds for kind in kinds)
                if engine != valid:
                    bad.append(f"{text}: bounded_validity disagrees ({cname})")
                summary[cname][0 if valid else 1] += 1
        detail = (f"{len(DUALITY_BATTERY)} formulas; principal valid/invalid {summary['principal']}, "
                  f"secondary {summary['secondary']}; {len(bad)} violations")
        return not bad, detail, {"violations": bad}
    return _timed(6, "duality results", 120.0, body)


# -- 7: opaque classification -----------------------------------------------------------------

def all_types(max_depth: int, max_arity: int) -> list[TypeExpr]:
    """Every type of bracket depth <= ``max_depth`` with tuple arity <= ``max_arity``."""
    level: list[TypeExpr] = [E1, E2]
    for _ in range(max_depth):
        tuples = [TupleType(c) for n in range(1, max_arity + 1) for c in itertools.product(level, repeat=n)]
        level = [E1, E2] + tuples
    return level


def _leaf_scan(t: TypeExpr) -> str | None:
    # oracle on the printed form: first top-level component mentioning e2
    text = str(t)
    if "e2" not in text:
        return None
    depth, start, k = 0, 1, 0
    for pos, ch in enumerate(text):
        if ch == "<":
            depth += 1
        elif ch == ">":
            depth -= 1
        if (ch == "," and depth == 1) or pos == len(text) - 1:
            k += 1
            if "e2" in text[start:pos]:
                return f"component {k} has leaf e2"
            start = pos + 1
    raise AssertionError(text)


def check_opacity(max_depth: int = 2, max_arity: int = 3, samples: int = 20000, seed: int = 0) -> CheckResult:
    def body():
        types = [t for t in all_types(max_depth, max_arity) if isinstance(t, TupleType)]
        bad = [str(t) for t in types if opacity_violation(t) != _leaf_scan(t) or is_opaque(t) != (_leaf_scan(t) is None)]
        rng = random.Random(seed)
        inner = [E1, E2] + types
        sampled = 0
        for _ in range(samples):
            t = TupleType(tuple(rng.choice(inner) for _ in range(rng.randint(1, max_arity))))
            sampled += 1
            if opacity_violation(t) != _leaf_scan(t):
                bad.append(str(t))
        return not bad, (f"{len(types)} tuple types exhaustively (depth <= {max_depth}, arity <= {max_arity}) "
                         f"+ {sampled} sampled at depth {max_depth + 1}; {len(bad)} disagreements"), {"bad": bad}
    return _timed(7, "opaque classification", None, body)


# -- 8: tautology oracle ------------------------------------------------------------------------

ATOMS = tuple(Atom(Const(f"P{k}", TupleType((E2,))), (Const("a", E2),)) for k in range(1, 5))


def _skeletons(depth: int) -> list:
    level = [("a", k) for k in range(4)]
    for _ in range(depth):
        level = ([("a", k) for k in range(4)] + [("n", s) for s in level]
                 + [("i", l, r) for l in level for r in level])
    return level


def _random_skeleton(rng: random.Random, depth: int):
    if depth == 0 or rng.random() < 0.15:
        return ("a", rng.randrange(4))
    if rng.random() < 0.35:
        return ("n", _random_skeleton(rng, depth - 1))
    return ("i", _random_skeleton(rng, depth - 1), _random_skeleton(rng, depth - 1))


def _to_formula(s):
    if s[0] == "a":
        return ATOMS[s[1]]
    if s[0] == "n":
        return Not(_to_formula(s[1]))
    return Implies(_to_formula(s[1]), _to_formula(s[2]))


def _brute_tautology(s) -> bool:
    def ev(node, env):
        if node[0] == "a":
            return env[node[1]]
        if node[0] == "n":
            return not ev(node[1], env)
        return (not ev(node[1], env)) or ev(node[2], env)
    return all(ev(s, env) for env in itertools.product((False, True), repeat=4))


def check_tautology(exhaustive_depth: int = 2, samples: int = 10000, max_depth: int = 6,
                    seed: int = 0) -> CheckResult:
    def body():
        exhaustive = _skeletons(exhaustive_depth)
        rng = random.Random(seed)
        sampled = [_random_skeleton(rng, max_depth) for _ in range(samples)]
        bad = 0
        n_taut = 0
        for s in exhaustive + sampled:
            want = _brute_tautology(s)
            n_taut += want
            if is_tautology_instance(_to_formula(s)) != want:
                bad += 1
        return bad == 0, (f"{len(exhaustive)} skeletons exhaustively (depth <= {exhaustive_depth}) + "
                          f"{samples} sampled (depth <= {max_depth}), {n_taut} tautologies, "
                          f"{bad} disagreements"), {"disagreements": bad}
    return _timed(8, "tautology oracle", None, body)


CHECKS = {
    1: check_power_profile, 2: check_permutations, 3: check_corpus, 4: check_soundness,
    5: check_identity, 6: check_duality, 7: check_opacity, 8: check_tautology,
}


def run_suite(seed: int = 0, only=None, workers: int = 1) -> list[CheckResult]:
    out = []
    for number, fn in CHECKS.items():
        if only and number not in only:
            continue
        if number in (2, 7, 8):
            out.append(fn(seed=seed))
        elif number == 4:
            out.append(fn(workers=workers))
        else:
            out.append(fn())
    return out
