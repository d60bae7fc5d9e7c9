"""Surface syntax: security types, terms, a parser and a pretty-printer.

The same type classes serve for static and gradual types; a gradual label is
just a label name or ``"?"``.  Which labels are legal is decided later by the
checkers against a concrete lattice.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .lattice import UNKNOWN, SecurityLattice, TWO_POINT

OPS = ("&&", "||", "=>")
KEYWORDS = frozenset({"true", "false", "if", "then", "else", "Bool"})


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


# -- types -------------------------------------------------------------------


@dataclass(frozen=True)
class Bool:
    label: str

    def __str__(self) -> str:
        return format_type(self)


@dataclass(frozen=True)
class Fun:
    dom: "Type"
    cod: "Type"
    label: str

    def __str__(self) -> str:
        return format_type(self)


Type = Union[Bool, Fun]


def format_type(t: Type) -> str:
    if isinstance(t, Bool):
        return f"Bool@{t.label}"
    return f"({format_type(t.dom)} -> {format_type(t.cod)})@{t.label}"


def type_labels(t: Type) -> Iterator[str]:
    yield t.label
    if isinstance(t, Fun):
        yield from type_labels(t.dom)
        yield from type_labels(t.cod)


def is_static_type(t: Type) -> bool:
    return all(lab != UNKNOWN for lab in type_labels(t))


def type_depth(t: Type) -> int:
    if isinstance(t, Bool):
        return 1
    return 1 + max(type_depth(t.dom), type_depth(t.cod))


# -- terms -------------------------------------------------------------------


@dataclass(frozen=True)
class BoolLit:
    value: bool
    label: str
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Lam:
    param: str
    annot: Type
    body: "Term"
    label: str
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    lhs: "Term"
    rhs: "Term"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class If:
    cond: "Term"
    then: "Term"
    else_: "Term"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Ascribe:
    term: "Term"
    type: Type
    span: Optional[Span] = field(default=None, compare=False, repr=False)


Term = Union[BoolLit, Var, Lam, App, BinOp, If, Ascribe]


def apply_op(op: str, b1: bool, b2: bool) -> bool:
    if op == "&&":
        return b1 and b2
    if op == "||":
        return b1 or b2
    if op == "=>":
        return (not b1) or b2
    raise ValueError(f"unknown operator {op!r}")


def term_labels(t: Term) -> Iterator[str]:
    """Every label occurring in a term, including those inside annotations."""
    if isinstance(t, BoolLit):
        yield t.label
    elif isinstance(t, Lam):
        yield from type_labels(t.annot)
        yield t.label
        yield from term_labels(t.body)
    elif isinstance(t, App):
        yield from term_labels(t.fun)
        yield from term_labels(t.arg)
    elif isinstance(t, BinOp):
        yield from term_labels(t.lhs)
        yield from term_labels(t.rhs)
    elif isinstance(t, If):
        yield from term_labels(t.cond)
        yield from term_labels(t.then)
        yield from term_labels(t.else_)
    elif isinstance(t, Ascribe):
        yield from term_labels(t.term)
        yield from type_labels(t.type)


def free_vars(t: Term) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset({t.name})
    if isinstance(t, BoolLit):
        return frozenset()
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.param}
    if isinstance(t, App):
        return free_vars(t.fun) | free_vars(t.arg)
    if isinstance(t, BinOp):
        return free_vars(t.lhs) | free_vars(t.rhs)
    if isinstance(t, If):
        return free_vars(t.cond) | free_vars(t.then) | free_vars(t.else_)
    if isinstance(t, Ascribe):
        return free_vars(t.term)
    raise TypeError(f"not a term: {t!r}")


def term_depth(t: Term) -> int:
    if isinstance(t, (BoolLit, Var)):
        return 1
    if isinstance(t, Lam):
        return 1 + term_depth(t.body)
    if isinstance(t, App):
        return 1 + max(term_depth(t.fun), term_depth(t.arg))
    if isinstance(t, BinOp):
        return 1 + max(term_depth(t.lhs), term_depth(t.rhs))
    if isinstance(t, If):
        return 1 + max(term_depth(t.cond), term_depth(t.then), term_depth(t.else_))
    if isinstance(t, Ascribe):
        return 1 + term_depth(t.term)
    raise TypeError(f"not a term: {t!r}")


# -- lexer -------------------------------------------------------------------


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int
    end_line: int
    end_col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<sym>::|->|&&|\|\||=>|[\\λ().:@?])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<bad>[^ \t\r\n])
    """,
    re.VERBOSE,
)


def tokenize(source: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        assert m is not None
        text = m.group()
        kind = m.lastgroup
        start_line, start_col = line, col
        for ch in text:
            if ch == "\n":
                line, col = line + 1, 1
            else:
                col += 1
        pos = m.end()
        if kind == "ws":
            continue
        if kind == "bad":
            if text in "&|=!<>+-*/~%^":
                raise ParseError(f"unknown operator {text!r}", start_line, start_col)
            raise ParseError(f"unexpected character {text!r}", start_line, start_col)
        if kind == "sym" and text == "λ":
            text = "\\"
        if kind == "ident" and text in KEYWORDS:
            kind = "kw"
        tokens.append(Token(kind, text, start_line, start_col, line, col))
    tokens.append(Token("eof", "", line, col, line, col))
    return tokens


# -- parser ------------------------------------------------------------------


class _Parser:
    def __init__(self, source: str, default_label: str):
        self.toks = tokenize(source)
        self.i = 0
        self.default_label = default_label

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        return self.tok.kind in ("sym", "kw") and self.tok.text == text

    def advance(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.advance()

    def error(self, message: str):
        tok = self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"{message}, found {found}", tok.line, tok.col)

    def span_from(self, start: Token) -> Span:
        prev = self.toks[self.i - 1]
        return Span(start.line, start.col, prev.end_line, prev.end_col)

    def label(self) -> str:
        if self.at("?"):
            self.advance()
            return UNKNOWN
        if self.tok.kind == "ident":
            return self.advance().text
        self.error("expected a label")

    def opt_label(self) -> str:
        if self.at("@"):
            self.advance()
            return self.label()
        return self.default_label

    def type(self) -> Type:
        if self.at("Bool"):
            self.advance()
            self.expect("@")
            return Bool(self.label())
        if self.at("("):
            self.advance()
            dom = self.type()
            self.expect("->")
            cod = self.type()
            self.expect(")")
            self.expect("@")
            return Fun(dom, cod, self.label())
        self.error("expected a type")

    def term(self) -> Term:
        if self.at("if"):
            start = self.advance()
            cond = self.term()
            self.expect("then")
            then = self.term()
            self.expect("else")
            else_ = self.term()
            return If(cond, then, else_, self.span_from(start))
        return self.asc()

    def asc(self) -> Term:
        start = self.tok
        t = self.opexp()
        while self.at("::"):
            self.advance()
            t = Ascribe(t, self.type(), self.span_from(start))
        return t

    def opexp(self) -> Term:
        start = self.tok
        t = self.app()
        while self.tok.kind == "sym" and self.tok.text in OPS:
            op = self.advance().text
            t = BinOp(op, t, self.app(), self.span_from(start))
        return t

    def starts_atom(self) -> bool:
        tok = self.tok
        return tok.kind == "ident" or (tok.kind in ("kw", "sym") and tok.text in ("true", "false", "("))

    def app(self) -> Term:
        start = self.tok
        if not self.starts_atom():
            self.error("expected a term")
        t = self.atom()
        while self.starts_atom():
            t = App(t, self.atom(), self.span_from(start))
        return t

    def atom(self) -> Term:
        start = self.tok
        if self.at("true") or self.at("false"):
            value = self.advance().text == "true"
            label = self.opt_label()
            return BoolLit(value, label, self.span_from(start))
        if self.tok.kind == "ident":
            return Var(self.advance().text, self.span_from(start))
        self.expect("(")
        if self.at("\\"):
            self.advance()
            if self.tok.kind != "ident":
                self.error("expected a parameter name")
            param = self.advance().text
            self.expect(":")
            annot = self.type()
            self.expect(".")
            body = self.term()
            self.expect(")")
            label = self.opt_label()
            return Lam(param, annot, body, label, self.span_from(start))
        t = self.term()
        self.expect(")")
        return t


def parse(source: str, lattice: Optional[SecurityLattice] = None) -> Term:
    """Parse a program; unannotated literals and lambdas get the lattice bottom."""
    lat = lattice or TWO_POINT
    p = _Parser(source, lat.bottom)
    if p.tok.kind == "eof":
        raise ParseError("empty program", p.tok.line, p.tok.col)
    t = p.term()
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return t


def parse_type(source: str) -> Type:
    p = _Parser(source, TWO_POINT.bottom)
    t = p.type()
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return t


# -- printer -----------------------------------------------------------------

_IF, _ASC, _OP, _APP, _ATOM = range(5)


def _level(t: Term) -> int:
    if isinstance(t, If):
        return _IF
    if isinstance(t, Ascribe):
        return _ASC
    if isinstance(t, BinOp):
        return _OP
    if isinstance(t, App):
        return _APP
    return _ATOM


def _fmt(t: Term, need: int) -> str:
    s = _fmt_bare(t)
    return f"({s})" if _level(t) < need else s


def _fmt_bare(t: Term) -> str:
    if isinstance(t, BoolLit):
        return f"{'true' if t.value else 'false'}@{t.label}"
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Lam):
        return f"(\\{t.param}:{format_type(t.annot)}. {_fmt(t.body, _IF)})@{t.label}"
    if isinstance(t, App):
        return f"{_fmt(t.fun, _APP)} {_fmt(t.arg, _ATOM)}"
    if isinstance(t, BinOp):
        return f"{_fmt(t.lhs, _OP)} {t.op} {_fmt(t.rhs, _APP)}"
    if isinstance(t, If):
        return f"if {_fmt(t.cond, _IF)} then {_fmt(t.then, _IF)} else {_fmt(t.else_, _IF)}"
    if isinstance(t, Ascribe):
        return f"{_fmt(t.term, _ASC)} :: {format_type(t.type)}"
    raise TypeError(f"not a term: {t!r}")


def pretty(t: Term) -> str:
    """Render a term in concrete syntax that parses back to the same tree."""
    return _fmt_bare(t)
