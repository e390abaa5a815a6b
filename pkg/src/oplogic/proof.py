"""Hilbert-style proof checking.

Axiom schemata A1 (tautologies in ``!``/``->``), A2, A3, A4 (comprehension)
and the weakened choice schema; rules MP and GEN; premises; and DEFEQ, which
rewrites between an identity and its Leibniz expansion.  Every formula is
desugared before comparison and comparisons are up to alpha-equivalence.

Proof file format::

    # comment
    @const c^e2                       # optional declarations
    premises:
      P^<e1>(c^e1)                    # one premise formula per line
    1. P(c) ; PREM 1
    2. P(c) -> P(c) ; A1
    3. P(c) ; MP 1 2

Justification tokens: ``A1 A2 A3 A4 CHOICE PREM k MP i j GEN i X DEFEQ i``.
``MP i j`` expects line ``i`` to be ``A`` and line ``j`` to be ``A -> B``.
``GEN i X`` binds the variable named ``X`` (optionally ``X^type``) over
line ``i``.  Types annotated once in the file may be omitted afterwards.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CaptureError, ProofSyntaxError, SizeError, ParseError
from .lang.parser import (
    extend_decls, format_formula, parse, parse_declaration, strip_comment,
)
from .lang.syntax import (
    E1, And, Atom, Eq, Exists, Forall, Formula, Implies, Not, Term,
    TupleType, TypeExpr, Var, alpha_equal, alpha_key, contains_eq, desugar,
    free_variables, is_primitive, substitute,
)

TAUTOLOGY_GUARD = 24
RULES = ("A1", "A2", "A3", "A4", "CHOICE", "PREM", "MP", "GEN", "DEFEQ")
AXIOMS = ("A1", "A2", "A3", "A4", "CHOICE")


def _primitive(f: Formula) -> Formula:
    return f if is_primitive(f) else desugar(f)


# -- A1: propositional skeletons ------------------------------------------------

def skeleton(f: Formula):
    """Abstract maximal non-``!``/``->`` subformulas into propositional atoms.

    Returns ``(tree, atoms)`` where ``tree`` is built from ``("var", k)``,
    ``("not", t)`` and ``("imp", t, u)``, and ``atoms[k]`` is the abstracted
    subformula.  Alpha-equivalent subformulas share an atom.
    """
    f = _primitive(f)
    index: dict = {}
    atoms: list[Formula] = []

    def go(g: Formula):
        if isinstance(g, Not):
            return ("not", go(g.body))
        if isinstance(g, Implies):
            return ("imp", go(g.left), go(g.right))
        key = alpha_key(g)
        if key not in index:
            index[key] = len(atoms)
            atoms.append(g)
        return ("var", index[key])

    return go(f), atoms


def _truth_table(tree, n_atoms: int) -> np.ndarray:
    rows = np.arange(1 << n_atoms, dtype=np.int64)
    cols = [((rows >> k) & 1).astype(bool) for k in range(n_atoms)]
    if n_atoms == 0:
        cols = []
        rows = np.zeros(1, dtype=np.int64)

    def ev(t):
        if t[0] == "var":
            return cols[t[1]]
        if t[0] == "not":
            return ~ev(t[1])
        return ~ev(t[1]) | ev(t[2])

    out = ev(tree)
    return np.broadcast_to(out, rows.shape)


def is_tautology_instance(f: Formula, guard: int = TAUTOLOGY_GUARD) -> bool:
    """A1: ``f`` is a substitution instance of a tautology in ``!`` and ``->``."""
    tree, atoms = skeleton(f)
    if len(atoms) > guard:
        raise SizeError(f"{len(atoms)} propositional atoms exceed the tautology guard {guard}")
    return bool(_truth_table(tree, len(atoms)).all())


# -- schema matching -----------------------------------------------------------

@dataclass(frozen=True)
class Match:
    """Outcome of a schema match; falsy on failure with ``reason`` set."""

    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


_YES = Match(True)


def _no(reason: str) -> Match:
    return Match(False, reason)


def _match_a2(f: Formula) -> Match:
    if not (isinstance(f, Implies) and isinstance(f.left, Forall)
            and isinstance(f.left.body, Implies) and isinstance(f.right, Implies)
            and isinstance(f.right.right, Forall)):
        return _no("not of the form forall X (A -> B) -> (A -> forall X B)")
    x = f.left.var
    a, b = f.left.body.left, f.left.body.right
    a2, rest = f.right.left, f.right.right
    if x in free_variables(a):
        return _no(f"{x.name} free in antecedent")
    if not alpha_equal(a, a2):
        return _no("antecedents differ")
    if rest.var.type != x.type or not alpha_equal(Forall(x, b), Forall(rest.var, rest.body)):
        return _no("consequents differ")
    return _YES


class _NoInstance(Exception):
    pass


def _find_instance(a: Formula, x: Term, c: Formula) -> Term | None:
    """Find U with ``c`` alpha-equal to ``a[U/x]``; None if ``x`` is not free in ``a``."""
    found: list[Term] = []

    def term(ta: Term, tc: Term, ea: dict, ec: dict, depth: int):
        if ta == x and ta not in ea:
            if tc in ec:
                raise CaptureError(f"{tc} would be captured by a quantifier")
            if found and found[0] != tc:
                raise _NoInstance(f"{x.name} is instantiated inconsistently ({found[0]} vs {tc})")
            found[:1] = [tc]
            return
        if ta in ea:
            if tc not in ec or depth - ea[ta] != depth - ec[tc] or ta.type != tc.type:
                raise _NoInstance("bound variables do not correspond")
        elif tc in ec or ta != tc:
            raise _NoInstance(f"{ta} does not match {tc}")

    def walk(ga, gc, ea, ec, depth):
        if type(ga) is not type(gc):
            raise _NoInstance("shapes differ")
        if isinstance(ga, Atom):
            if len(ga.args) != len(gc.args):
                raise _NoInstance("arities differ")
            for ta, tc in zip((ga.head, *ga.args), (gc.head, *gc.args)):
                term(ta, tc, ea, ec, depth)
        elif isinstance(ga, Not):
            walk(ga.body, gc.body, ea, ec, depth)
        elif isinstance(ga, Implies):
            walk(ga.left, gc.left, ea, ec, depth)
            walk(ga.right, gc.right, ea, ec, depth)
        elif isinstance(ga, Forall):
            if ga.var.type != gc.var.type:
                raise _NoInstance("quantifier types differ")
            walk(ga.body, gc.body, {**ea, ga.var: depth + 1}, {**ec, gc.var: depth + 1}, depth + 1)
        else:
            raise _NoInstance(f"unexpected {type(ga).__name__}")

    walk(a, c, {}, {}, 0)
    return found[0] if found else None


def _match_a3(f: Formula) -> Match:
    if not (isinstance(f, Implies) and isinstance(f.left, Forall)):
        return _no("not of the form forall X A(X) -> A(U)")
    x, a, c = f.left.var, f.left.body, f.right
    try:
        u = _find_instance(a, x, c)
    except CaptureError as e:
        return _no(f"term not free for {x.name}: {e}")
    except _NoInstance as e:
        return _no(f"consequent is not an instance of the quantified formula ({e})")
    u = x if u is None else u
    if u.type != x.type:
        return _no(f"{u} does not have the type {x.type} of {x.name}")
    try:
        inst = substitute(a, x, u)
    except CaptureError as e:
        return _no(str(e))
    if not alpha_equal(inst, c):
        return _no("consequent is not an instance of the quantified formula")
    return _YES


def _split_iff(g: Formula):
    """Undo the desugaring of ``A <-> B``; None if ``g`` is not one."""
    if (isinstance(g, Not) and isinstance(g.body, Implies)
            and isinstance(g.body.left, Implies) and isinstance(g.body.right, Not)
            and isinstance(g.body.right.body, Implies)):
        l, r = g.body.left.left, g.body.left.right
        r2, l2 = g.body.right.body.left, g.body.right.body.right
        if alpha_equal(l, l2) and alpha_equal(r, r2):
            return l, r
    return None


def _match_a4(f: Formula) -> Match:
    if not (isinstance(f, Not) and isinstance(f.body, Forall) and isinstance(f.body.body, Not)):
        return _no("not of the form exists X ...")
    xi, body = f.body.var, f.body.body.body
    if not isinstance(xi.type, TupleType):
        return _no(f"comprehension variable {xi.name} is not of a relation type")
    comps = xi.type.components
    bound = []
    for want in comps:
        if not isinstance(body, Forall):
            return _no(f"expected {len(comps)} universal quantifier(s) after the comprehension variable")
        if body.var.type != want:
            return _no(f"quantified variable {body.var.name} has type {body.var.type}, expected {want}")
        bound.append(body.var)
        body = body.body
    if len(set(bound)) != len(bound):
        return _no("quantified variables are not distinct")
    parts = _split_iff(body)
    if parts is None:
        return _no("matrix is not a biconditional")
    left, defining = parts
    if left != Atom(xi, tuple(bound)):
        return _no(f"left side of the biconditional is not {xi.name} applied to the quantified variables")
    if xi in free_variables(defining):
        return _no(f"{xi.name} occurs free in the defining formula")
    return _YES


def choice_instance(t1: TypeExpr, t2: TypeExpr) -> Formula:
    """The weakened choice axiom for types ``t1``, ``t2`` (both other than e1)."""
    rel = TupleType((t1, t2))
    z1, z2 = Var("Z1", rel), Var("Z2", rel)
    x1, x2 = Var("X1", t1), Var("X2", t1)
    y1, y2 = Var("Y1", t2), Var("Y2", t2)
    hyp = Forall(x1, Implies(
        Exists(y1, Atom(z1, (x1, y1))),
        Exists(y1, And(Atom(z2, (x1, y1)), Atom(z1, (x1, y1))))))
    concl = Forall(x1, Forall(x2, Forall(y1, Forall(y2, Implies(
        And(Atom(z2, (x1, y1)), Atom(z2, (x1, y2))), Eq(y1, y2))))))
    return Forall(z1, Exists(z2, Implies(hyp, concl)))


def _match_choice(f: Formula) -> Match:
    if not (isinstance(f, Forall) and isinstance(f.var.type, TupleType) and f.var.type.arity == 2):
        return _no("not of the form forall Z1^<t1,t2> exists Z2 ...")
    t1, t2 = f.var.type.components
    if E1 in (t1, t2):
        return _no("choice is restricted to types other than e1")
    if not alpha_equal(f, desugar(choice_instance(t1, t2))):
        return _no(f"not the choice schema at types {t1}, {t2}")
    return _YES


_MATCHERS = {"A2": _match_a2, "A3": _match_a3, "A4": _match_a4, "CHOICE": _match_choice}


def match_axiom(schema: str, f: Formula) -> Match:
    """Match ``f`` (desugared on the fly) against an axiom schema."""
    schema = schema.upper()
    g = _primitive(f)
    if schema == "A1":
        return _YES if is_tautology_instance(g) else _no("not a tautology instance")
    if schema not in _MATCHERS:
        raise ValueError(f"unknown schema {schema!r}")
    return _MATCHERS[schema](g)


# -- proofs ------------------------------------------------------------------

@dataclass(frozen=True)
class Justification:
    rule: str
    refs: tuple[int, ...] = ()
    var: str | None = None
    var_type: TypeExpr | None = None

    def __post_init__(self):
        want = {"PREM": 1, "MP": 2, "GEN": 1, "DEFEQ": 1}.get(self.rule, 0)
        if self.rule not in RULES:
            raise ValueError(f"unknown rule {self.rule!r}")
        if len(self.refs) != want:
            raise ValueError(f"{self.rule} takes {want} reference(s)")
        if (self.rule == "GEN") != (self.var is not None):
            raise ValueError("GEN (and only GEN) names a variable")

    def __str__(self) -> str:
        parts = [self.rule, *map(str, self.refs)]
        if self.var is not None:
            parts.append(self.var if self.var_type is None else f"{self.var}^{self.var_type}")
        return " ".join(parts)


@dataclass(frozen=True)
class ProofLine:
    formula: Formula
    justification: Justification
    source_line: int | None = None


@dataclass(frozen=True)
class Proof:
    premises: tuple[Formula, ...]
    lines: tuple[ProofLine, ...]
    name: str | None = None

    @property
    def conclusion(self) -> Formula | None:
        return self.lines[-1].formula if self.lines else None

    def axiom_instances(self, rules=AXIOMS) -> list[Formula]:
        return [ln.formula for ln in self.lines if ln.justification.rule in rules]


@dataclass(frozen=True)
class ProofVerdict:
    accepted: bool
    n_lines: int
    line: int | None = None
    reason: str | None = None
    source_line: int | None = None

    def __bool__(self) -> bool:
        return self.accepted

    def summary(self) -> str:
        if self.accepted:
            return f"accepted ({self.n_lines} line{'' if self.n_lines == 1 else 's'})"
        return f"rejected at line {self.line}: {self.reason}"


def _check_line(k: int, lines: tuple[ProofLine, ...], prim: list[Formula],
                deps: list[frozenset], premises: list[Formula]) -> tuple[str | None, frozenset]:
    line = lines[k]
    j = line.justification
    g = prim[k]
    for r in j.refs if j.rule != "PREM" else ():
        if not 1 <= r < k + 1:
            return f"line {r} does not precede line {k + 1}", frozenset()
    if j.rule in AXIOMS:
        m = match_axiom(j.rule, g)
        return (None if m else f"{j.rule}: {m.reason}"), frozenset()
    if j.rule == "PREM":
        (r,) = j.refs
        if not 1 <= r <= len(premises):
            return f"no premise {r}", frozenset()
        if not alpha_equal(g, premises[r - 1]):
            return f"formula is not premise {r}", frozenset()
        return None, frozenset({r})
    if j.rule == "MP":
        i, m = j.refs
        imp = prim[m - 1]
        if not isinstance(imp, Implies):
            return f"MP: line {m} is not an implication", frozenset()
        if not alpha_equal(imp.left, prim[i - 1]):
            return f"MP: line {i} is not the antecedent of line {m}", frozenset()
        if not alpha_equal(imp.right, g):
            return f"MP: formula is not the consequent of line {m}", frozenset()
        return None, deps[i - 1] | deps[m - 1]
    if j.rule == "GEN":
        (i,) = j.refs
        if not isinstance(g, Forall):
            return "GEN: formula is not universally quantified", frozenset()
        v = Var(j.var, j.var_type or g.var.type)
        if v.type != g.var.type or not alpha_equal(g, Forall(v, prim[i - 1])):
            return f"GEN: formula is not forall {v} applied to line {i}", frozenset()
        for p in sorted(deps[i - 1]):
            if v in free_variables(premises[p - 1]):
                return f"GEN over {v}, which is free in premise {p}", frozenset()
        return None, deps[i - 1]
    (i,) = j.refs
    if not (contains_eq(line.formula) or contains_eq(lines[i - 1].formula)):
        return "DEFEQ: neither line contains an identity", frozenset()
    if not alpha_equal(g, prim[i - 1]):
        return f"DEFEQ: formula is not line {i} with identity expanded or contracted", frozenset()
    return None, deps[i - 1]


def check_proof(p: Proof) -> ProofVerdict:
    """Check every line; report the first one that fails."""
    premises = [_primitive(f) for f in p.premises]
    prim: list[Formula] = []
    deps: list[frozenset] = []
    for k, line in enumerate(p.lines):
        prim.append(_primitive(line.formula))
        try:
            reason, dep = _check_line(k, p.lines, prim, deps, premises)
        except SizeError as e:
            reason, dep = str(e), frozenset()
        if reason is not None:
            return ProofVerdict(False, len(p.lines), k + 1, reason, line.source_line)
        deps.append(dep)
    if not p.lines:
        return ProofVerdict(False, 0, None, "empty proof")
    return ProofVerdict(True, len(p.lines))


# -- file format -------------------------------------------------------------

_NUMBERED = re.compile(r"^\s*(\d+)\.\s*(.*)$")


def parse_justification(text: str, decls: dict, line: int = 1) -> Justification:
    toks = text.split()
    if not toks:
        raise ProofSyntaxError("missing justification", line, 1)
    rule = toks[0].upper()
    if rule not in RULES:
        raise ProofSyntaxError(f"unknown justification {toks[0]!r}", line, 1)
    args = toks[1:]
    try:
        if rule == "GEN":
            if len(args) != 2:
                raise ValueError
            name, _, tpart = args[1].partition("^")
            vtype = parse(tpart, "type") if tpart else None
            return Justification(rule, (int(args[0]),), name, vtype)
        return Justification(rule, tuple(int(a) for a in args))
    except (ValueError, ParseError):
        raise ProofSyntaxError(f"malformed justification {text.strip()!r}", line, 1) from None


def parse_proof(text: str, name: str | None = None) -> Proof:
    decls: dict[str, Term] = {}
    premises: list[Formula] = []
    lines: list[ProofLine] = []
    in_premises = False
    for n, raw in enumerate(text.splitlines(), 1):
        body = strip_comment(raw).strip()
        if not body:
            continue
        if body.startswith("@"):
            d = parse_declaration(body, n)
            decls[d.name] = d
            continue
        if body.rstrip(":").lower() == "premises" and body.endswith(":"):
            if lines or in_premises:
                raise ProofSyntaxError("premises block must come first and only once", n, 1)
            in_premises = True
            continue
        m = _NUMBERED.match(body)
        if m is None:
            if not in_premises or lines:
                raise ProofSyntaxError("expected a numbered proof line 'n. formula ; justification'", n, 1)
            f = parse(body, "formula", decls, line=n)
            extend_decls(decls, f)
            premises.append(f)
            continue
        num, rest = int(m.group(1)), m.group(2)
        if num != len(lines) + 1:
            raise ProofSyntaxError(f"expected line number {len(lines) + 1}, found {num}", n, 1)
        formula_text, sep, just_text = rest.rpartition(";")
        if not sep:
            raise ProofSyntaxError("missing ';' before the justification", n, 1)
        f = parse(formula_text, "formula", decls, line=n)
        extend_decls(decls, f)
        lines.append(ProofLine(f, parse_justification(just_text, decls, n), n))
    return Proof(tuple(premises), tuple(lines), name)


def load_proof(path) -> Proof:
    path = Path(path)
    return parse_proof(path.read_text(encoding="utf-8"), path.stem)


def format_proof(p: Proof) -> str:
    out = []
    if p.premises:
        out.append("premises:")
        out.extend(f"  {format_formula(f)}" for f in p.premises)
    for k, ln in enumerate(p.lines, 1):
        out.append(f"{k}. {format_formula(ln.formula)} ; {ln.justification}")
    return "\n".join(out) + "\n"
