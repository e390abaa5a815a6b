"""Concrete syntax: tokenizer, recursive-descent parser and canonical printer.

Grammar (lowest precedence first; ``->`` and quantifier bodies extend to
the right, ``&``, ``|`` and ``<->`` associate to the left)::

    formula := quant | iff
    quant   := ("forall" | "exists") NAME ["^" type] "." formula
    iff     := imp ("<->" imp)*
    imp     := or ["->" (imp | quant)]
    or      := and ("|" and)*
    and     := unary ("&" unary)*
    unary   := "!" (unary | quant) | primary
    primary := "(" formula ")" | term "(" term ("," term)* ")" | term "=" term
    term    := NAME ["^" type]
    type    := "e1" | "e2" | "<" type ("," type)* ">"

Unicode spellings are accepted for the connectives (``¬ → ∧ ∨ ↔ ∀ ∃``).

Type annotations may be dropped after the first annotated occurrence of a
name in the same scope: a quantifier's annotation covers its body, and the
first annotated free occurrence covers the rest of the formula (or file).
Names bound by a quantifier are variables; a free name is a variable when
it starts with one of ``u v w x y z U V W X Y Z`` and a constant otherwise,
unless a declaration says otherwise.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from ..errors import ParseError, TypingError
from .syntax import (
    BINDERS, CONST, E1, E2, VAR, And, Atom, Eq, Exists, Forall, Formula, Iff,
    Implies, Not, Or, Term, TupleType, TypeExpr, free_variables, terms_of,
)

VARIABLE_INITIALS = frozenset("uvwxyzUVWXYZ")

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<op><->|->|[!&|=().,^<>]|¬|→|∧|∨|↔|∀|∃)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
""", re.VERBOSE)

_UNICODE = {"¬": "!", "→": "->", "∧": "&", "∨": "|", "↔": "<->", "∀": "forall", "∃": "exists"}


@dataclass
class _Tok:
    kind: str  # "op", "name", "eof"
    text: str
    line: int
    col: int


def tokenize(text: str, line0: int = 1) -> list[_Tok]:
    toks = []
    pos, line, col = 0, line0, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        s = m.group()
        if m.lastgroup != "ws":
            val = _UNICODE.get(s, s)
            kind = "name" if m.lastgroup == "name" and val not in ("forall", "exists") else "op"
            if val in ("forall", "exists"):
                kind = "op"
            toks.append(_Tok(kind, val, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
        pos = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


# -- raw syntax tree (before name resolution) ---------------------------------

@dataclass
class _RTerm:
    name: str
    type: TypeExpr | None
    line: int
    col: int


@dataclass
class _RAtom:
    head: _RTerm
    args: list


@dataclass
class _REq:
    left: _RTerm
    right: _RTerm
    line: int
    col: int


@dataclass
class _RNot:
    body: object


@dataclass
class _RBin:
    op: str
    left: object
    right: object


@dataclass
class _RQuant:
    op: str
    var: _RTerm
    body: object


class _Parser:
    def __init__(self, text: str, line0: int = 1):
        self.toks = tokenize(text, line0)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: _Tok | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def take(self, text: str) -> _Tok:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        tok = self.tok
        self.i += 1
        return tok

    def end(self):
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r} after end of expression")

    # types
    def type_(self) -> TypeExpr:
        tok = self.tok
        if tok.kind == "name" and tok.text in ("e1", "e2"):
            self.i += 1
            return E1 if tok.text == "e1" else E2
        if self.at("<"):
            self.i += 1
            comps = [self.type_()]
            while self.at(","):
                self.i += 1
                comps.append(self.type_())
            self.take(">")
            return TupleType(tuple(comps))
        raise self.error(f"expected a type, found {tok.text or 'end of input'!r}")

    # terms
    def term(self) -> _RTerm:
        tok = self.tok
        if tok.kind != "name":
            raise self.error(f"expected a name, found {tok.text or 'end of input'!r}")
        self.i += 1
        t = None
        if self.at("^"):
            self.i += 1
            t = self.type_()
        return _RTerm(tok.text, t, tok.line, tok.col)

    # formulas
    def formula(self):
        if self.at("forall") or self.at("exists"):
            return self.quant()
        return self.iff()

    def quant(self):
        op = self.tok.text
        self.i += 1
        var = self.term()
        self.take(".")
        return _RQuant(op, var, self.formula())

    def iff(self):
        left = self.imp()
        while self.at("<->"):
            self.i += 1
            left = _RBin("<->", left, self.imp())
        return left

    def imp(self):
        left = self.or_()
        if self.at("->"):
            self.i += 1
            right = self.quant() if (self.at("forall") or self.at("exists")) else self.imp()
            return _RBin("->", left, right)
        return left

    def or_(self):
        left = self.and_()
        while self.at("|"):
            self.i += 1
            left = _RBin("|", left, self.and_())
        return left

    def and_(self):
        left = self.unary()
        while self.at("&"):
            self.i += 1
            left = _RBin("&", left, self.unary())
        return left

    def unary(self):
        if self.at("!"):
            self.i += 1
            if self.at("forall") or self.at("exists"):
                return _RNot(self.quant())
            return _RNot(self.unary())
        return self.primary()

    def primary(self):
        if self.at("("):
            self.i += 1
            f = self.formula()
            self.take(")")
            return f
        if self.at("forall") or self.at("exists"):
            return self.quant()
        head = self.term()
        if self.at("("):
            self.i += 1
            args = [self.term()]
            while self.at(","):
                self.i += 1
                args.append(self.term())
            self.take(")")
            return _RAtom(head, args)
        if self.at("="):
            tok = self.take("=")
            return _REq(head, self.term(), tok.line, tok.col)
        raise self.error(f"expected '(' or '=' after {head.name!r}")


# -- name resolution -------------------------------------------------------------

def _default_kind(name: str) -> str:
    return VAR if name[0] in VARIABLE_INITIALS else CONST


class _Resolver:
    def __init__(self, decls: Mapping[str, Term] | None):
        self.decls = dict(decls or {})
        self.free_types: dict[str, TypeExpr] = {}

    @staticmethod
    def _bound(rt: _RTerm, scope: list[Term]) -> Term | None:
        for v in reversed(scope):
            if v.name == rt.name and (rt.type is None or rt.type == v.type):
                return v
        return None

    def collect(self, node, scope: list[Term]):
        if isinstance(node, _RAtom):
            for rt in [node.head, *node.args]:
                self._note(rt, scope)
        elif isinstance(node, _REq):
            self._note(node.left, scope)
            self._note(node.right, scope)
        elif isinstance(node, _RNot):
            self.collect(node.body, scope)
        elif isinstance(node, _RBin):
            self.collect(node.left, scope)
            self.collect(node.right, scope)
        elif isinstance(node, _RQuant):
            if node.var.type is None:
                raise ParseError(f"quantified variable {node.var.name!r} needs a type annotation",
                                 node.var.line, node.var.col)
            self.collect(node.body, scope + [Term(VAR, node.var.name, node.var.type)])

    def _note(self, rt: _RTerm, scope):
        if rt.type is not None and self._bound(rt, scope) is None:
            self.free_types.setdefault(rt.name, rt.type)

    def term(self, rt: _RTerm, scope: list[Term]) -> Term:
        bound = self._bound(rt, scope)
        if bound is not None:
            return bound
        decl = self.decls.get(rt.name)
        t = rt.type or self.free_types.get(rt.name) or (decl.type if decl else None)
        if t is None:
            raise TypingError(f"cannot infer the type of {rt.name!r}; annotate one occurrence", rt.line, rt.col)
        kind = decl.kind if decl is not None and decl.type == t else _default_kind(rt.name)
        return Term(kind, rt.name, t)

    def build(self, node, scope: list[Term]) -> Formula:
        if isinstance(node, _RAtom):
            head = self.term(node.head, scope)
            args = tuple(self.term(a, scope) for a in node.args)
            try:
                return Atom(head, args)
            except TypingError as e:
                raise e.at(node.head.line, node.head.col) from None
        if isinstance(node, _REq):
            left, right = self.term(node.left, scope), self.term(node.right, scope)
            try:
                return Eq(left, right)
            except TypingError as e:
                raise e.at(node.line, node.col) from None
        if isinstance(node, _RNot):
            return Not(self.build(node.body, scope))
        if isinstance(node, _RBin):
            cls = {"->": Implies, "&": And, "|": Or, "<->": Iff}[node.op]
            return cls(self.build(node.left, scope), self.build(node.right, scope))
        if isinstance(node, _RQuant):
            var = Term(VAR, node.var.name, node.var.type)
            body = self.build(node.body, scope + [var])
            return (Forall if node.op == "forall" else Exists)(var, body)
        raise AssertionError(node)


def parse(text: str, syntax: str = "formula", decls: Mapping[str, Term] | None = None,
          line: int = 1):
    """Parse ``text`` as a formula, a type or a term.

    ``decls`` maps names to prototype terms; it supplies types for
    unannotated names and overrides the variable/constant naming convention.
    Errors carry 1-based line/column positions (``line`` offsets them).
    """
    p = _Parser(text, line)
    if syntax == "type":
        t = p.type_()
        p.end()
        return t
    if syntax == "term":
        rt = p.term()
        p.end()
        return _Resolver(decls).term(rt, [])
    if syntax != "formula":
        raise ValueError(f"unknown syntax {syntax!r}")
    raw = p.formula()
    p.end()
    r = _Resolver(decls)
    r.collect(raw, [])
    return r.build(raw, [])


def parse_formula(text: str, decls: Mapping[str, Term] | None = None) -> Formula:
    return parse(text, "formula", decls)


def parse_type(text: str) -> TypeExpr:
    return parse(text, "type")


def parse_term(text: str, decls: Mapping[str, Term] | None = None) -> Term:
    return parse(text, "term", decls)


# -- files -------------------------------------------------------------------

def strip_comment(line: str) -> str:
    k = line.find("#")
    return line if k < 0 else line[:k]


def parse_declaration(text: str, line: int = 1) -> Term:
    """``@var NAME^type`` or ``@const NAME^type``."""
    head, _, rest = text.strip().partition(" ")
    kind = {"@var": VAR, "@const": CONST}.get(head)
    if kind is None:
        raise ParseError(f"unknown directive {head!r}", line, 1)
    p = _Parser(rest, line)
    rt = p.term()
    p.end()
    if rt.type is None:
        raise ParseError(f"declaration of {rt.name!r} needs a type", line, 1)
    return Term(kind, rt.name, rt.type)


def extend_decls(decls: dict[str, Term], f: Formula):
    """Record the free terms of ``f`` so later lines may omit their types."""
    free = free_variables(f)
    for t in terms_of(f):
        if (not t.is_var or t in free) and t.name not in decls:
            decls[t.name] = t


def read_formulas(text: str, decls: dict[str, Term] | None = None) -> list[tuple[int, Formula]]:
    """Parse a formula file: one formula per line, ``#`` comments, ``@var``/``@const``."""
    decls = {} if decls is None else decls
    out = []
    for n, raw in enumerate(text.splitlines(), 1):
        body = strip_comment(raw).strip()
        if not body:
            continue
        if body.startswith("@"):
            d = parse_declaration(body, n)
            decls[d.name] = d
            continue
        f = parse(body, "formula", decls, line=n)
        extend_decls(decls, f)
        out.append((n, f))
    return out


# -- canonical printer ---------------------------------------------------------

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4}
_SYM = {Iff: "<->", Implies: "->", Or: "|", And: "&"}
_NOT, _ATOM = 5, 6


def format_type(t: TypeExpr) -> str:
    return str(t)


def format_term(t: Term) -> str:
    return f"{t.name}^{t.type}"


def _prec(f: Formula) -> int:
    if isinstance(f, BINDERS):
        return 0
    if isinstance(f, Not):
        return _NOT
    if isinstance(f, (Atom, Eq)):
        return _ATOM
    return _PREC[type(f)]


def _fmt(f: Formula, need: int) -> str:
    if isinstance(f, Atom):
        s = f"{format_term(f.head)}({', '.join(map(format_term, f.args))})"
    elif isinstance(f, Eq):
        s = f"{format_term(f.left)} = {format_term(f.right)}"
    elif isinstance(f, Not):
        s = "!" + _fmt(f.body, _NOT)
    elif isinstance(f, BINDERS):
        op = "forall" if isinstance(f, Forall) else "exists"
        s = f"{op} {format_term(f.var)} . {_fmt(f.body, 0)}"
    else:
        p = _PREC[type(f)]
        if isinstance(f, Implies):
            lneed, rneed = p + 1, p
        else:
            lneed, rneed = p, p + 1
        s = f"{_fmt(f.left, lneed)} {_SYM[type(f)]} {_fmt(f.right, rneed)}"
    mine = _prec(f)
    if mine < need or (mine == 0 and need > 0):
        return f"({s})"
    return s


def format_formula(f: Formula) -> str:
    """Canonical text: every term annotated, minimal parentheses."""
    return _fmt(f, 0)


def format_any(x) -> str:
    if isinstance(x, Formula):
        return format_formula(x)
    if isinstance(x, Term):
        return format_term(x)
    return format_type(x)
