"""The SELECT-statement subset we emit: AST, printer, parser and alias-insensitive comparison."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from ..model import OpticaError


@dataclass(frozen=True)
class Col:
    alias: str
    column: str


@dataclass(frozen=True)
class Star:
    alias: str


@dataclass(frozen=True)
class Lit:
    value: Union[int, bool, str]


@dataclass(frozen=True)
class NotE:
    arg: "SqlExpr"


@dataclass(frozen=True)
class BinOp:
    op: str  # ">", "=", "-"
    left: "SqlExpr"
    right: "SqlExpr"


@dataclass(frozen=True)
class Exists:
    query: "Select"


@dataclass(frozen=True)
class IsNotNull:
    arg: "SqlExpr"


SqlExpr = Union[Col, Star, Lit, NotE, BinOp, Exists, IsNotNull]


@dataclass(frozen=True)
class Using:
    column: str
    # alias the column is matched against; implicit in the text
    parent: Optional[str] = field(default=None, compare=False)


@dataclass(frozen=True)
class On:
    left: Col
    right: Col


@dataclass(frozen=True)
class Join:
    table: str
    alias: str
    cond: Union[Using, On]


@dataclass(frozen=True)
class From:
    table: str
    alias: str
    joins: Tuple[Join, ...] = ()


@dataclass(frozen=True)
class Select:
    columns: Tuple[SqlExpr, ...]
    from_: Optional[From]
    where: Tuple[SqlExpr, ...] = ()  # conjunction; empty prints as WHERE True


# -- printing ----------------------------------------------------------------

_PREC = {"=": 1, ">": 1, "-": 2}


def _lit(v, quote: str) -> str:
    if isinstance(v, bool):
        return "True" if v else "False"
    if isinstance(v, int):
        return str(v)
    q = '"' if quote == "double" else "'"
    return q + v.replace(q, q + q) + q


def print_expr(e, quote: str = "double", indent: int = 0) -> str:
    if isinstance(e, Col):
        return f"{e.alias}.{e.column}"
    if isinstance(e, Star):
        return f"{e.alias}.*"
    if isinstance(e, Lit):
        return _lit(e.value, quote)
    if isinstance(e, NotE):
        return f"NOT({print_expr(e.arg, quote, indent)})"
    if isinstance(e, IsNotNull):
        return f"{print_expr(e.arg, quote, indent)} IS NOT NULL"
    if isinstance(e, Exists):
        return f"EXISTS({_print_select(e.query, quote)})"
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        left = print_expr(e.left, quote)
        right = print_expr(e.right, quote)
        if isinstance(e.left, BinOp) and _PREC[e.left.op] <= p and not (_PREC[e.left.op] == p and e.op == "-"):
            left = f"({left})"
        if isinstance(e.right, BinOp) and _PREC[e.right.op] <= p:
            right = f"({right})"
        if isinstance(e.left, IsNotNull):
            left = f"({left})"
        if isinstance(e.right, IsNotNull):
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(e)


def _print_select(s: Select, quote: str) -> str:
    parts = ["SELECT " + ", ".join(print_expr(c, quote) for c in s.columns)]
    if s.from_ is not None:
        f = s.from_
        text = f"FROM {f.table} AS {f.alias}"
        for j in f.joins:
            text += f" INNER JOIN {j.table} AS {j.alias} "
            if isinstance(j.cond, Using):
                text += f"USING {j.cond.column}"
            else:
                text += f"ON {print_expr(j.cond.left)} = {print_expr(j.cond.right)}"
        parts.append(text)
    if not s.where:
        parts.append("WHERE True")
    else:
        many = len(s.where) > 1
        conj = []
        for c in s.where:
            text = print_expr(c, quote)
            if many and isinstance(c, (BinOp, IsNotNull)):
                text = f"({text})"
            conj.append(text)
        parts.append("WHERE " + " AND ".join(conj))
    return " ".join(parts)


def print_sql(s: Select, quote: str = "double") -> str:
    """One-line statement text terminated by `;`."""
    if quote not in ("double", "single"):
        raise ValueError("quote must be 'double' or 'single'")
    return _print_select(s, quote) + ";"


# -- parsing (for golden comparison and the executor) ------------------------

class SqlSyntaxError(OpticaError):
    pass


_TOK = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+)
  | (?P<str>"(?:[^"]|"")*"|'(?:[^']|'')*')
  | (?P<star>[A-Za-z_][A-Za-z_0-9]*\.\*)
  | (?P<col>[A-Za-z_][A-Za-z_0-9]*\.[A-Za-z_][A-Za-z_0-9]*)
  | (?P<word>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[(),;=>\-])
""", re.VERBOSE)

_KEYWORDS = {"SELECT", "FROM", "AS", "INNER", "JOIN", "ON", "USING", "WHERE", "AND",
             "NOT", "EXISTS", "TRUE", "FALSE", "IS", "NULL"}


class _SqlParser:
    def __init__(self, text: str):
        self.toks = []
        pos = 0
        while pos < len(text):
            m = _TOK.match(text, pos)
            if m is None:
                raise SqlSyntaxError(f"unexpected character {text[pos]!r} at {pos}")
            if m.lastgroup != "ws":
                kind, val = m.lastgroup, m.group()
                if kind == "word" and val.upper() in _KEYWORDS:
                    kind, val = "kw", val.upper()
                self.toks.append((kind, val))
            pos = m.end()
        self.toks.append(("eof", ""))
        self.i = 0

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, val) -> bool:
        return self.peek()[1] == val and self.peek()[0] in ("kw", "op")

    def expect(self, val):
        if not self.at(val):
            raise SqlSyntaxError(f"expected {val}, found {self.peek()[1]!r}")
        return self.take()

    def name(self) -> str:
        kind, val = self.take()
        if kind != "word":
            raise SqlSyntaxError(f"expected a name, found {val!r}")
        return val

    def select(self) -> Select:
        self.expect("SELECT")
        cols = [self.expr()]
        while self.at(","):
            self.take()
            cols.append(self.expr())
        frm = None
        if self.at("FROM"):
            self.take()
            table = self.name()
            if self.at("AS"):
                self.take()
            alias = self.name()
            joins = []
            while self.at("INNER"):
                self.take()
                self.expect("JOIN")
                jt = self.name()
                if self.at("AS"):
                    self.take()
                ja = self.name()
                if self.at("USING"):
                    self.take()
                    paren = self.at("(")
                    if paren:
                        self.take()
                    cond = Using(self.name())
                    if paren:
                        self.expect(")")
                else:
                    self.expect("ON")
                    left = self.expr()
                    if not (isinstance(left, BinOp) and left.op == "=" and
                            isinstance(left.left, Col) and isinstance(left.right, Col)):
                        raise SqlSyntaxError("join condition must equate two columns")
                    cond = On(left.left, left.right)
                joins.append(Join(jt, ja, cond))
            frm = From(table, alias, tuple(joins))
        where: Tuple = ()
        if self.at("WHERE"):
            self.take()
            where = tuple(c for c in self.conjuncts() if c != Lit(True))
        return Select(tuple(cols), frm, where)

    def conjuncts(self) -> List:
        out = [self.cmp()]
        while self.at("AND"):
            self.take()
            out.append(self.cmp())
        return out

    def expr(self):
        cs = self.conjuncts()
        if len(cs) == 1:
            return cs[0]
        raise SqlSyntaxError("nested conjunctions are outside the supported subset")

    def cmp(self):
        left = self.add()
        if self.at("IS"):
            self.take()
            self.expect("NOT")
            self.expect("NULL")
            return IsNotNull(left)
        if self.at(">") or self.at("="):
            op = self.take()[1]
            return BinOp(op, left, self.add())
        return left

    def add(self):
        left = self.unary()
        while self.at("-"):
            self.take()
            left = BinOp("-", left, self.unary())
        return left

    def unary(self):
        kind, val = self.peek()
        if self.at("NOT"):
            self.take()
            self.expect("(")
            e = self.paren_body()
            self.expect(")")
            return NotE(e)
        if self.at("EXISTS"):
            self.take()
            self.expect("(")
            q = self.select()
            self.expect(")")
            return Exists(q)
        if self.at("("):
            self.take()
            e = self.paren_body()
            self.expect(")")
            return e
        if self.at("-") and self.peek(1)[0] == "num":
            self.take()
            return Lit(-int(self.take()[1]))
        self.take()
        if kind == "num":
            return Lit(int(val))
        if kind == "str":
            q = val[0]
            return Lit(val[1:-1].replace(q + q, q))
        if kind == "kw" and val in ("TRUE", "FALSE"):
            return Lit(val == "TRUE")
        if kind == "col":
            a, c = val.split(".")
            return Col(a, c)
        if kind == "star":
            return Star(val[:-2])
        raise SqlSyntaxError(f"unexpected {val!r}")

    def paren_body(self):
        cs = self.conjuncts()
        if len(cs) == 1:
            return cs[0]
        raise SqlSyntaxError("parenthesised conjunctions are outside the supported subset")


def parse_sql(text: str) -> Select:
    p = _SqlParser(text)
    s = p.select()
    if p.at(";"):
        p.take()
    if p.peek()[0] != "eof":
        raise SqlSyntaxError(f"trailing input {p.peek()[1]!r}")
    return s


# -- alpha equivalence -------------------------------------------------------

def canonical(s: Select, names: Optional[Dict[str, str]] = None, counter=None) -> Select:
    """Rename aliases to a0, a1, ... in binding order (FROM before the clauses that use it)."""
    names = dict(names or {})
    counter = counter if counter is not None else [0]

    def bind(alias: str) -> str:
        names[alias] = f"a{counter[0]}"
        counter[0] += 1
        return names[alias]

    def ref(alias: str) -> str:
        return names.get(alias, "?" + alias)

    def ex(e):
        if isinstance(e, Col):
            return Col(ref(e.alias), e.column)
        if isinstance(e, Star):
            return Star(ref(e.alias))
        if isinstance(e, NotE):
            return NotE(ex(e.arg))
        if isinstance(e, IsNotNull):
            return IsNotNull(ex(e.arg))
        if isinstance(e, BinOp):
            return BinOp(e.op, ex(e.left), ex(e.right))
        if isinstance(e, Exists):
            return Exists(canonical(e.query, names, counter))
        return e

    frm = None
    if s.from_ is not None:
        f = s.from_
        head = bind(f.alias)
        joins = []
        for j in f.joins:
            a = bind(j.alias)
            cond = j.cond if isinstance(j.cond, Using) else On(ex(j.cond.left), ex(j.cond.right))
            joins.append(Join(j.table, a, cond))
        frm = From(f.table, head, tuple(joins))
    return Select(tuple(ex(c) for c in s.columns), frm, tuple(ex(c) for c in s.where))


def alpha_equivalent(a: Union[str, Select], b: Union[str, Select]) -> bool:
    """Structural equality up to a consistent renaming of table aliases."""
    if isinstance(a, str):
        a = parse_sql(a)
    if isinstance(b, str):
        b = parse_sql(b)
    return canonical(a) == canonical(b)
