"""Command-line front end.

Exit status: 0 success or accepted, 1 rejected or counterexample (or a
failed check), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .errors import OpLogicError, ParseError
from .lang.parser import format_formula, format_type, parse_formula, parse_type, read_formulas
from .lang.syntax import E1, TupleType, desugar, free_variables, opacity_violation
from .model.fileio import FrameDocument, dump_frame_document, encode_element, load_frame_document
from .model.frames import KINDS
from .model.semantics import (
    Interpretation, bounded_validity, is_true, refuting_valuation, satisfies, veiled_extension,
)
from .proof import check_proof, load_proof
from .qset import (
    combine, format_qset, indist, is_subqset, parse_qset, power_profile, quasi_cardinal,
    strong_singleton,
)
from .report import FORMATS, emit_report, proof_report, validity_report

BOUNDS_ENV = "OPLOGIC_BOUNDS"
DEFAULT_BOUNDS = (3, 2, 2, "symmetric")

GRAMMAR = """\
usage: oplogic COMMAND [options] ...

commands:
  parse     [TEXT ...] [--file F] [--type] [--desugar]   parse and print canonically
  classify  TYPE ...                                     opaque-predicate classification
  prove     FILE.prf ...                                 check proof scripts
  eval      --frame F [FORMULA]                          truth in a frame file
  validity  FORMULA | --proof F.prf  [--nm --M --depth --kind]
  qset      OP ARG ...    (show card indist combine sub power singleton)
  permtest  [--trials N] [--exchanges N]                 unobservability of permutations
  suite     [--only 1,2,...]                             acceptance checks

common options: --format text|structured  --seed N  --timing
types     e1 | e2 | <t1,...,tn>
terms     name^type    (variables start with u-z or U-Z; @var/@const override)
formulas  ! & | -> <-> = (tightest first), forall X^t . A, exists X^t . A
default bounds from $OPLOGIC_BOUNDS, e.g. "3,2,2,symmetric"
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def default_bounds() -> tuple[int, int, int, str]:
    raw = os.environ.get(BOUNDS_ENV)
    if not raw:
        return DEFAULT_BOUNDS
    parts = [p.strip() for p in raw.split(",")]
    try:
        nm, M, depth = (int(p) for p in parts[:3])
        kind = parts[3] if len(parts) > 3 else DEFAULT_BOUNDS[3]
    except ValueError:
        raise UsageError(f"{BOUNDS_ENV} must look like '3,2,2,symmetric', got {raw!r}") from None
    if kind not in KINDS or len(parts) > 4:
        raise UsageError(f"{BOUNDS_ENV} must look like '3,2,2,symmetric', got {raw!r}")
    return nm, M, depth, kind


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="text")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--timing", action="store_true", help="include elapsed times")

    p = _Parser(prog="oplogic", description="Workbench for the logic of opaque predicates.")
    p.add_argument("--version", action="version", version=f"oplogic {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("parse", parents=[common], help="parse and print formulas or types")
    s.add_argument("text", nargs="*")
    s.add_argument("--file")
    s.add_argument("--type", action="store_true", help="parse types instead of formulas")
    s.add_argument("--desugar", action="store_true", help="print the primitive form")

    s = sub.add_parser("classify", parents=[common], help="classify relation types")
    s.add_argument("types", nargs="+")

    s = sub.add_parser("prove", parents=[common], help="check proof scripts")
    s.add_argument("files", nargs="+")

    s = sub.add_parser("eval", parents=[common], help="evaluate a formula in a frame file")
    s.add_argument("formula", nargs="?")
    s.add_argument("--frame", required=True)
    s.add_argument("--fixed-constants", action="store_true",
                   help="hold constants at their denotations instead of ranging over orbits")

    s = sub.add_parser("validity", parents=[common], help="bounded validity search")
    s.add_argument("formula", nargs="?")
    s.add_argument("--proof", help="check the conclusion of a proof under its premises")
    s.add_argument("--premise", action="append", default=[])
    s.add_argument("--nm", type=int)
    s.add_argument("--M", type=int, dest="M")
    s.add_argument("--depth", type=int)
    s.add_argument("--kind", choices=KINDS[:2])
    s.add_argument("--min-nm", type=int, default=1)
    s.add_argument("--budget", type=int, default=4096)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", help="write the counterexample as a frame file")

    s = sub.add_parser("qset", parents=[common], help="quasi-set operations")
    s.add_argument("op", choices=("show", "card", "indist", "combine", "sub", "power", "singleton"))
    s.add_argument("args", nargs="+")

    s = sub.add_parser("permtest", parents=[common], help="permutation unobservability tests")
    s.add_argument("--trials", type=int, default=500)
    s.add_argument("--exchanges", type=int, default=1000)

    s = sub.add_parser("suite", parents=[common], help="run the acceptance checks")
    s.add_argument("--only", help="comma-separated check numbers")
    s.add_argument("--workers", type=int, default=1)
    return p


# -- commands ------------------------------------------------------------------

def cmd_parse(a) -> tuple[dict, int]:
    items = []
    if a.file:
        text = Path(a.file).read_text(encoding="utf-8")
        if a.type:
            sources = [(n, ln.split("#")[0].strip()) for n, ln in enumerate(text.splitlines(), 1)]
            items = [format_type(parse_type(s)) for _, s in sources if s]
        else:
            items = [format_formula(desugar(f) if a.desugar else f) for _, f in read_formulas(text)]
    for t in a.text:
        if a.type:
            items.append(format_type(parse_type(t)))
        else:
            f = parse_formula(t)
            items.append(format_formula(desugar(f) if a.desugar else f))
    if not items:
        raise UsageError("nothing to parse")
    return {"version": 1, "command": "parse", "items": items}, 0


def cmd_classify(a) -> tuple[dict, int]:
    results, status = [], 0
    for text in a.types:
        t = parse_type(text)
        if not isinstance(t, TupleType):
            verdict = f"not opaque: {format_type(t)} is not a relation type"
        else:
            why = opacity_violation(t)
            verdict = "opaque" if why is None else f"not opaque: {why}"
        if verdict != "opaque":
            status = 1
        results.append({"type": format_type(t), "verdict": verdict})
    doc = {"version": 1, "command": "classify"}
    if len(results) == 1:
        doc.update(results[0])
    else:
        doc["results"] = results
    return doc, status


def cmd_prove(a) -> tuple[dict, int]:
    docs, status = [], 0
    for path in a.files:
        proof = _load_proof(path)
        verdict = check_proof(proof)
        if not verdict.accepted:
            status = 1
        docs.append(proof_report(path, proof, verdict))
    if len(docs) == 1:
        return docs[0], status
    return {"version": 1, "command": "prove", "accepted": sum(d["accepted"] for d in docs),
            "rejected": sum(not d["accepted"] for d in docs), "results": docs}, status


class InputError(OpLogicError):
    """An input file failed to parse; the message carries path and position."""


def _load_proof(path):
    try:
        return load_proof(path)
    except ParseError as e:
        raise InputError(f"{path}:{e}") from None


def _load_frame(path):
    try:
        return load_frame_document(path)
    except ParseError as e:
        raise InputError(f"{path}: formula {e}") from None


def cmd_eval(a) -> tuple[dict, int]:
    doc_in = _load_frame(a.frame)
    f = parse_formula(a.formula, doc_in.decls) if a.formula else doc_in.formula
    if f is None:
        raise UsageError("no formula given and the frame file holds none")
    interp = Interpretation(doc_in.frame, doc_in.denotation)
    orbit = not a.fixed_constants
    truth = is_true(interp, f, orbit_variants=orbit)
    doc = {"version": 1, "command": "eval", "formula": format_formula(f),
           "frame": doc_in.frame.describe(), "true": truth}
    if not truth:
        ref = refuting_valuation(interp, f, orbit_variants=orbit)
        doc["refuted_by"] = {str(t): encode_element(doc_in.frame, t.type, x)
                             for t, x in sorted(ref.items(), key=lambda kv: str(kv[0]))}
    if doc_in.valuation and free_variables(f) <= set(doc_in.valuation):
        doc["satisfied_by_file_valuation"] = satisfies(interp, doc_in.valuation, f)
    veiled = {}
    for c in sorted(doc_in.denotation, key=str):
        if c.type == TupleType((E1,)):
            veiled[str(c)] = format_qset(veiled_extension(interp, c))
    if veiled:
        doc["veiled_extensions"] = veiled
    return doc, 0 if truth else 1


def cmd_validity(a) -> tuple[dict, int]:
    nm, M, depth, kind = default_bounds()
    nm = a.nm if a.nm is not None else nm
    M = a.M if a.M is not None else M
    depth = a.depth if a.depth is not None else depth
    kind = a.kind or kind
    premises = [parse_formula(p) for p in a.premise]
    normal = []
    if a.proof:
        if a.formula:
            raise UsageError("give either a formula or --proof, not both")
        proof = _load_proof(a.proof)
        verdict = check_proof(proof)
        if not verdict.accepted:
            raise UsageError(f"{a.proof}: proof is not accepted ({verdict.summary()})")
        f = proof.conclusion
        premises += list(proof.premises)
        normal = proof.axiom_instances(("A4",))
    elif a.formula:
        f = parse_formula(a.formula)
    else:
        raise UsageError("validity needs a formula or --proof")
    report = bounded_validity(f, nm, M, depth, kind, premises=premises, normal_instances=normal,
                              min_nm=a.min_nm, budget=a.budget, workers=a.workers)
    doc = validity_report(report, timing=a.timing)
    if a.out and report.counterexample is not None:
        ce = report.counterexample
        Path(a.out).write_text(dump_frame_document(FrameDocument(ce.frame, ce.denotation, ce.valuation, f)),
                               encoding="utf-8")
        doc["written"] = a.out
    return doc, 0 if report.holds else 1


def cmd_qset(a) -> tuple[dict, int]:
    arity = {"show": 1, "card": 1, "indist": 2, "combine": 3, "sub": 2, "power": 1, "singleton": 2}[a.op]
    if len(a.args) != arity:
        raise UsageError(f"qset {a.op} takes {arity} argument(s)")
    doc = {"version": 1, "command": "qset", "op": a.op}
    status = 0
    if a.op == "show":
        doc["result"] = format_qset(parse_qset(a.args[0]))
    elif a.op == "card":
        doc["result"] = quasi_cardinal(parse_qset(a.args[0]))
    elif a.op == "indist":
        doc["result"] = indist(parse_qset(a.args[0]), parse_qset(a.args[1]))
        status = 0 if doc["result"] else 1
    elif a.op == "sub":
        doc["result"] = is_subqset(parse_qset(a.args[0]), parse_qset(a.args[1]))
        status = 0 if doc["result"] else 1
    elif a.op == "combine":
        doc["result"] = format_qset(combine(a.args[0], parse_qset(a.args[1]), parse_qset(a.args[2])))
    elif a.op == "power":
        prof = power_profile(parse_qset(a.args[0]))
        doc["shapes"] = [{"shape": format_qset(s), "multiplicity": m} for s, m in prof]
        doc["total"] = prof.total()
    else:
        doc["result"] = format_qset(strong_singleton(parse_qset(a.args[0]), a.args[1]))
    return doc, status


def cmd_permtest(a) -> tuple[dict, int]:
    from .suite import check_permutations
    r = check_permutations(seed=a.seed, exchanges=a.exchanges, triples=a.trials)
    doc = {"version": 1, "command": "permtest", "seed": a.seed, "exchanges": a.exchanges,
           "exchange_failures": r.data["exchange_failures"], "trials": a.trials,
           "failures": r.data["triple_failures"], "passed": r.passed}
    if a.timing:
        doc["elapsed_seconds"] = round(r.elapsed, 4)
    return doc, 0 if r.passed else 1


def cmd_suite(a) -> tuple[dict, int]:
    from .suite import run_suite
    only = None
    if a.only:
        try:
            only = {int(x) for x in a.only.split(",")}
        except ValueError:
            raise UsageError("--only expects comma-separated numbers") from None
    results = run_suite(seed=a.seed, only=only, workers=a.workers)
    checks = []
    for r in results:
        item = {"number": r.number, "title": r.title, "passed": r.passed, "detail": r.detail}
        if a.timing:
            item["elapsed_seconds"] = round(r.elapsed, 4)
        checks.append(item)
    ok = all(r.passed for r in results)
    return {"version": 1, "command": "suite", "seed": a.seed, "passed": ok, "checks": checks}, 0 if ok else 1


COMMANDS = {
    "parse": cmd_parse, "classify": cmd_classify, "prove": cmd_prove, "eval": cmd_eval,
    "validity": cmd_validity, "qset": cmd_qset, "permtest": cmd_permtest, "suite": cmd_suite,
}


def main(argv=None) -> int:
    out, err = sys.stdout, sys.stderr
    try:
        args = build_parser().parse_args(argv)
        doc, status = COMMANDS[args.command](args)
    except UsageError as e:
        err.write(f"error: {e}\n\n{GRAMMAR}")
        return 2
    except (OpLogicError, OSError) as e:
        err.write(f"error: {e}\n")
        return 2
    out.write(emit_report(doc, args.format))
    return status


if __name__ == "__main__":
    sys.exit(main())
