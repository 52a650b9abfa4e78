"""Surface syntax: tokenizer, recursive-descent parser and printer.

Precedence, loosest first::

    a >>> b        right associative
    a *** b        left associative
    a > b, a == b  non associative
    a - b          left associative
    a.not          postfix
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional

from .ast import (AFFINE, FOLD, GETTER, Eq, Filtered, Fork, Get, GetAll, Gt, Id, Like,
                  NonEmpty, Not, Optic, Preview, Prim, Query, Seq, Span, Sub, ToAf, ToFl,
                  desugar_all, desugar_any, desugar_elem, desugar_empty)
from .model import B, I, OpticaError, S


class ParseError(OpticaError):
    def __init__(self, message: str, span: Span):
        super().__init__(message)
        self.message = message
        self.span = span


@dataclass(frozen=True)
class Token:
    kind: str  # ident | int | string | op | eof
    text: str
    start: int
    end: int


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<op>>>>|\*\*\*|==|\.not\b|[>\-(),])
  | (?P<int>\d+)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
""", re.VERBOSE)

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


def tokenize(text: str) -> List[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            bad = text[pos]
            msg = "unterminated string literal" if bad == '"' else f"unexpected character {bad!r}"
            raise ParseError(msg, Span(pos, pos + 1))
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), m.start(), m.end()))
        pos = m.end()
    out.append(Token("eof", "", len(text), len(text)))
    return out


def _unquote(tok: Token) -> str:
    body = tok.text[1:-1]
    return re.sub(r"\\(.)", lambda m: _ESCAPES.get(m.group(1), m.group(1)), body)


_IDS = {"id": GETTER, "id_gt": GETTER, "id_af": AFFINE, "id_fl": FOLD}
_UNARY = {"filtered": Filtered, "nonEmpty": NonEmpty, "not": Not, "to_af": ToAf, "to_fl": ToFl}
_QUERIES = {"get": Get, "preview": Preview, "getAll": GetAll}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        return self.advance()

    def error(self, message: str) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        return ParseError(f"{message}, found {found}", Span(t.start, max(t.end, t.start)))

    def span_from(self, start: int) -> Span:
        return Span(start, self.toks[self.i - 1].end)

    # expr := fork ('>>>' expr)?
    def expr(self) -> Optic:
        start = self.tok.start
        left = self.fork()
        if self.at(">>>"):
            self.advance()
            right = self.expr()
            return Seq(None, left, right, span=self.span_from(start))
        return left

    def fork(self) -> Optic:
        start = self.tok.start
        left = self.cmp()
        while self.at("***"):
            self.advance()
            right = self.cmp()
            left = Fork(left, right, span=self.span_from(start))
        return left

    def cmp(self) -> Optic:
        start = self.tok.start
        left = self.arith()
        if self.at(">") or self.at("=="):
            op = self.advance().text
            right = self.arith()
            node = Gt if op == ">" else Eq
            left = node(left, right, span=self.span_from(start))
            if self.at(">") or self.at("=="):
                raise self.error("comparisons do not chain; add parentheses")
        return left

    def arith(self) -> Optic:
        start = self.tok.start
        left = self.postfix()
        while self.at("-"):
            self.advance()
            right = self.postfix()
            left = Sub(left, right, span=self.span_from(start))
        return left

    def postfix(self) -> Optic:
        start = self.tok.start
        e = self.atom()
        while self.at(".not"):
            self.advance()
            e = Not(e, span=self.span_from(start))
        return e

    def literal(self):
        t = self.tok
        if t.kind == "int":
            self.advance()
            return I(int(t.text))
        if self.at("-") and self.peek().kind == "int":
            self.advance()
            return I(-int(self.advance().text))
        if t.kind == "string":
            self.advance()
            return S(_unquote(t))
        if t.kind == "ident" and t.text in ("true", "false"):
            self.advance()
            return B(t.text == "true")
        raise self.error("expected a literal (integer, \"string\", true or false)")

    def args(self, n: int, last_literal: bool = False):
        self.expect("(")
        out = []
        for k in range(n):
            if k:
                self.expect(",")
            out.append(self.literal() if last_literal and k == n - 1 else self.expr())
        self.expect(")")
        return out

    def atom(self) -> Optic:
        t = self.tok
        start = t.start
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind != "ident":
            raise self.error("expected an optic expression")
        name = t.text
        calls = self.peek().kind == "op" and self.peek().text == "("
        if name in _IDS:
            self.advance()
            return Id(_IDS[name], span=self.span_from(start))
        if name == "like":
            self.advance()
            return Like(self.literal(), span=self.span_from(start))
        if calls and name in _UNARY:
            self.advance()
            (arg,) = self.args(1)
            return _UNARY[name](arg, span=self.span_from(start))
        if calls and name in ("all", "any"):
            self.advance()
            fl, p = self.args(2)
            fn = desugar_all if name == "all" else desugar_any
            return _respan(fn(fl, p), self.span_from(start))
        if calls and name == "elem":
            self.advance()
            fl, a = self.args(2, last_literal=True)
            return _respan(desugar_elem(fl, a), self.span_from(start))
        if calls and name == "empty":
            self.advance()
            (fl,) = self.args(1)
            return _respan(desugar_empty(fl), self.span_from(start))
        if name in ("true", "false"):
            raise self.error("literals must be introduced with 'like'")
        self.advance()
        return Prim(name, span=self.span_from(start))

    def finish(self):
        if self.tok.kind != "eof":
            raise self.error("unexpected trailing input")


def _respan(e, span: Span):
    """Give the nodes synthesized by a derived form the span of the whole call."""
    from dataclasses import fields, replace
    if getattr(e, "span", None) is not None:
        return e
    changes = {"span": span}
    for f in fields(e):
        v = getattr(e, f.name)
        if f.name not in ("ty", "span") and hasattr(v, "span"):
            changes[f.name] = _respan(v, span)
    return replace(e, **changes)


def parse_optic(text: str) -> Optic:
    p = _Parser(text)
    e = p.expr()
    p.finish()
    return e


def parse_query(text: str) -> Query:
    p = _Parser(text)
    t = p.tok
    if not (t.kind == "ident" and t.text in _QUERIES):
        raise p.error("expected get(...), preview(...) or getAll(...)")
    p.advance()
    if not p.at("("):
        raise p.error(f"{t.text} takes its optic in parentheses")
    (e,) = p.args(1)
    p.finish()
    return _QUERIES[t.text](e, span=Span(t.start, p.toks[p.i - 1].end))


# -- printing ----------------------------------------------------------------

_LEVEL_SEQ, _LEVEL_FORK, _LEVEL_CMP, _LEVEL_SUB, _LEVEL_ATOM = range(1, 6)


def _level(e) -> int:
    if isinstance(e, Seq):
        return _LEVEL_SEQ
    if isinstance(e, Fork):
        return _LEVEL_FORK
    if isinstance(e, (Gt, Eq)):
        return _LEVEL_CMP
    if isinstance(e, Sub):
        return _LEVEL_SUB
    return _LEVEL_ATOM


def _lit(v) -> str:
    if isinstance(v, S):
        return '"' + v.value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, B):
        return "true" if v.value else "false"
    return str(v.value)


def _wrap(e, need: int) -> str:
    text = print_optic(e)
    return f"({text})" if _level(e) < need else text


def print_optic(e: Optic) -> str:
    """Render an expression; casts and identity kinds are printed explicitly."""
    if isinstance(e, Id):
        return {GETTER: "id", AFFINE: "id_af", FOLD: "id_fl"}[e.kind]
    if isinstance(e, Prim):
        return e.name
    if isinstance(e, Like):
        return f"like {_lit(e.value)}"
    if isinstance(e, Seq):
        return f"{_wrap(e.left, _LEVEL_FORK)} >>> {_wrap(e.right, _LEVEL_SEQ)}"
    if isinstance(e, Fork):
        return f"{_wrap(e.left, _LEVEL_FORK)} *** {_wrap(e.right, _LEVEL_CMP)}"
    if isinstance(e, (Gt, Eq)):
        op = ">" if isinstance(e, Gt) else "=="
        return f"{_wrap(e.left, _LEVEL_SUB)} {op} {_wrap(e.right, _LEVEL_SUB)}"
    if isinstance(e, Sub):
        return f"{_wrap(e.left, _LEVEL_SUB)} - {_wrap(e.right, _LEVEL_ATOM)}"
    if isinstance(e, Not):
        return f"not({print_optic(e.arg)})"
    if isinstance(e, Filtered):
        return f"filtered({print_optic(e.pred)})"
    if isinstance(e, NonEmpty):
        return f"nonEmpty({print_optic(e.arg)})"
    if isinstance(e, ToAf):
        return f"to_af({print_optic(e.arg)})"
    if isinstance(e, ToFl):
        return f"to_fl({print_optic(e.arg)})"
    raise TypeError(f"not an optic expression: {e!r}")


def print_query(q: Query) -> str:
    name = {Get: "get", Preview: "preview", GetAll: "getAll"}[type(q)]
    return f"{name}({print_optic(q.optic)})"


def render_diagnostic(text: str, span: Optional[Span], message: str) -> str:
    """Message plus the offending line with a caret underline."""
    if span is None:
        return f"error: {message}"
    line_start = text.rfind("\n", 0, span.start) + 1
    line_end = text.find("\n", span.start)
    if line_end < 0:
        line_end = len(text)
    lineno = text.count("\n", 0, span.start) + 1
    col = span.start - line_start
    width = max(1, min(span.end, line_end) - span.start)
    return (f"error: {message}\n"
            f"  --> query:{lineno}:{col + 1}\n"
            f"   | {text[line_start:line_end]}\n"
            f"   | {' ' * col}{'^' * width}")
