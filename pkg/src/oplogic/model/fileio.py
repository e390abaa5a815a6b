"""Frame description files.

A frame file is a YAML (or JSON) mapping::

    version: 1
    kind: symmetric            # standard | symmetric | custom
    m: {s: 2}                  # species -> number of atoms
    M: [a]                     # classical tags
    types: ["<e1>"]            # extra types to materialize
    relations:                 # custom frames only: type -> list of relations
      "<e1>": [[], ["s.1", "s.2"]]
    denotation:                # constants, written name^type
      "P^<e1>": ["s.1"]
    valuation:                 # variables, written name^type
      "x^e1": "s.2"
    formula: "exists x^e1 . P^<e1>(x^e1)"

Atoms are written ``species.index`` with a 1-based index inside the
species.  A relation is a list of rows, each row a list with one entry per
component.  Rows of a unary relation over ``e1`` or ``e2`` may be written
as the bare entry, as above.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..errors import FrameError, OpLogicError
from ..lang.parser import format_formula, format_type, parse_formula, parse_type
from ..lang.syntax import CONST, E1, E2, VAR, BaseType, Formula, Term, TypeExpr, types_of
from .frames import Frame, FrameSpec, build_frame, elem_key

FILE_VERSION = 1


def encode_element(frame: Frame, t: TypeExpr, x):
    if t == E1:
        return frame.atom_name(x)
    if t == E2:
        return x
    comps = t.components
    rows = sorted(x, key=lambda row: tuple(elem_key(v) for v in row))
    if len(comps) == 1 and isinstance(comps[0], BaseType):
        return [encode_element(frame, comps[0], row[0]) for row in rows]
    return [[encode_element(frame, c, v) for c, v in zip(comps, row)] for row in rows]


def decode_element(frame: Frame, t: TypeExpr, data):
    if t == E1:
        if not isinstance(data, str):
            raise FrameError(f"expected an atom name for e1, got {data!r}")
        return frame.atom_label(data)
    if t == E2:
        if data not in frame.classical:
            raise FrameError(f"{data!r} is not a classical tag of the frame")
        return data
    if not isinstance(data, list):
        raise FrameError(f"expected a list of rows for {t}, got {data!r}")
    comps = t.components
    rows = []
    for row in data:
        if len(comps) == 1 and isinstance(comps[0], BaseType) and not isinstance(row, list):
            row = [row]
        if not isinstance(row, list) or len(row) != len(comps):
            raise FrameError(f"row {row!r} does not have {len(comps)} component(s) for {t}")
        rows.append(tuple(decode_element(frame, c, v) for c, v in zip(comps, row)))
    return frozenset(rows)


def _term_key(t: Term) -> str:
    return f"{t.name}^{format_type(t.type)}"


def _parse_term_key(key: str, kind: str) -> Term:
    name, sep, type_text = str(key).partition("^")
    if not sep or not name:
        raise FrameError(f"term key {key!r} must be written name^type")
    return Term(kind, name.strip(), parse_type(type_text.strip()))


@dataclass
class FrameDocument:
    frame: Frame
    denotation: dict = field(default_factory=dict)
    valuation: dict = field(default_factory=dict)
    formula: Formula | None = None

    @property
    def decls(self) -> dict[str, Term]:
        return {t.name: t for t in list(self.denotation) + list(self.valuation)}


def document_data(doc: FrameDocument) -> dict:
    """Plain-data form of a frame document (ready for YAML or JSON)."""
    frame = doc.frame
    data: dict = {"version": FILE_VERSION, "kind": frame.kind,
                  "m": {s: c for s, c in frame.species_counts()}, "M": list(frame.classical),
                  "types": [format_type(t) for t in frame.types if t not in (E1, E2)]}
    if frame.kind == "custom":
        data["relations"] = {format_type(t): [encode_element(frame, t, x) for x in frame.domain(t)]
                             for t in frame.types if t not in (E1, E2)}
    data["denotation"] = {_term_key(c): encode_element(frame, c.type, x)
                          for c, x in sorted(doc.denotation.items(), key=lambda kv: _term_key(kv[0]))}
    data["valuation"] = {_term_key(v): encode_element(frame, v.type, x)
                         for v, x in sorted(doc.valuation.items(), key=lambda kv: _term_key(kv[0]))}
    if doc.formula is not None:
        data["formula"] = format_formula(doc.formula)
    return data


def dump_frame_document(doc: FrameDocument, fmt: str = "yaml") -> str:
    data = document_data(doc)
    if fmt == "json":
        return json.dumps(data, indent=2) + "\n"
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=None, allow_unicode=True)


def frame_document_from_data(data) -> FrameDocument:
    if not isinstance(data, dict):
        raise FrameError("a frame file must hold a mapping")
    if "command" in data:
        # a validity report: use its counterexample
        if not isinstance(data.get("counterexample"), dict):
            raise FrameError("report holds no counterexample to load")
        data = data["counterexample"]
    version = data.get("version", FILE_VERSION)
    if version != FILE_VERSION:
        raise FrameError(f"unsupported frame file version {version!r}")
    unknown = set(data) - {"version", "kind", "m", "M", "types", "relations", "denotation",
                           "valuation", "formula", "budget", "max_depth"}
    if unknown:
        raise FrameError(f"unknown frame file key(s): {', '.join(sorted(map(str, unknown)))}")
    try:
        m = data.get("m") or {}
        if isinstance(m, int):
            m = {"s": m}
        species = tuple((str(s), int(c)) for s, c in m.items())
        M = tuple(str(x) for x in data.get("M") or ())
        den_keys = [_parse_term_key(k, CONST) for k in (data.get("denotation") or {})]
        val_keys = [_parse_term_key(k, VAR) for k in (data.get("valuation") or {})]
        decls = {t.name: t for t in den_keys + val_keys}
        formula = parse_formula(data["formula"], decls) if data.get("formula") else None
        types = [parse_type(str(t)) for t in data.get("types") or ()]
        types += [t.type for t in den_keys + val_keys]
        if formula is not None:
            types += sorted(types_of(formula), key=str)
        relations_raw = data.get("relations") or {}
        rel_types = [parse_type(str(k)) for k in relations_raw]
    except OpLogicError:
        raise
    except (AttributeError, TypeError, ValueError) as exc:
        raise FrameError(f"malformed frame file: {exc}") from None
    kind = data.get("kind", "standard")
    max_depth = int(data.get("max_depth", max([t.depth for t in types + rel_types] + [0])))
    budget = int(data.get("budget", 1 << 16))
    base = FrameSpec(species, M, tuple(types), kind, None, budget, max_depth)
    relations = None
    if kind == "custom":
        # decode relations against a frame holding their component domains
        comps = build_frame(FrameSpec(species, M, tuple(c for t in rel_types for c in t.components),
                                      "standard", None, budget, max_depth))
        relations = {}
        for t, rows in zip(rel_types, relations_raw.values()):
            relations[t] = tuple(decode_element(comps, t, r) for r in rows or ())
    spec = FrameSpec(species, M, tuple(types), kind, relations, budget, max_depth)
    frame = build_frame(spec if kind == "custom" else base)
    den_raw = list((data.get("denotation") or {}).values())
    val_raw = list((data.get("valuation") or {}).values())
    denotation = {c: decode_element(frame, c.type, x) for c, x in zip(den_keys, den_raw)}
    valuation = {v: decode_element(frame, v.type, x) for v, x in zip(val_keys, val_raw)}
    for t, x in list(denotation.items()) + list(valuation.items()):
        if not frame.contains(t.type, x):
            raise FrameError(f"value of {t} is not in the domain of {format_type(t.type)}")
    return FrameDocument(frame, denotation, valuation, formula)


def parse_frame_document(text: str) -> FrameDocument:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise FrameError(f"cannot read frame file: {exc}") from None
    return frame_document_from_data(data)


def load_frame_document(path) -> FrameDocument:
    return parse_frame_document(Path(path).read_text(encoding="utf-8"))
