"""A tiny bag-semantics evaluator for the emitted SELECT subset."""
from __future__ import annotations

from typing import Dict, Iterable, List, Mapping, Optional, Union

from ..model import Base, OpticKind, OpticaError, RelTable, Schema
from .sqlast import (BinOp, Col, Exists, IsNotNull, Lit, NotE, On, Select, Star,
                     parse_sql)


class SqlExecError(OpticaError):
    pass


Env = Dict[str, tuple]  # alias -> (table, row dict)


def _lookup(env: Env, alias: str, column: str):
    if alias not in env:
        raise SqlExecError(f"unknown alias {alias!r}")
    table, row = env[alias]
    if column not in row:
        raise SqlExecError(f"table {table.name} has no column {column!r}")
    return row[column]


def _compare(op: str, a, b):
    if a is None or b is None:
        return None
    if op == "=":
        if type(a) is not type(b):
            raise SqlExecError(f"cannot compare {a!r} with {b!r}")
        return a == b
    if not (type(a) is int and type(b) is int):
        raise SqlExecError(f"'{op}' needs integers, got {a!r} and {b!r}")
    return a > b if op == ">" else a - b


class _Exec:
    def __init__(self, tables: Mapping[str, RelTable], schema: Optional[Schema]):
        self.tables = tables
        self.schema = schema

    def table(self, name: str) -> RelTable:
        try:
            return self.tables[name]
        except KeyError:
            raise SqlExecError(f"unknown table {name!r}") from None

    def rows(self, name: str) -> List[dict]:
        t = self.table(name)
        return [dict(zip(t.columns, r)) for r in t.rows]

    def value(self, e, env: Env):
        if isinstance(e, Col):
            return _lookup(env, e.alias, e.column)
        if isinstance(e, Lit):
            return e.value
        if isinstance(e, NotE):
            v = self.value(e.arg, env)
            return None if v is None else (not v)
        if isinstance(e, IsNotNull):
            return self.value(e.arg, env) is not None
        if isinstance(e, BinOp):
            return _compare(e.op, self.value(e.left, env), self.value(e.right, env))
        if isinstance(e, Exists):
            return len(self.select(e.query, env)) > 0
        raise SqlExecError(f"unsupported expression {e!r}")

    def star(self, alias: str, env: Env) -> tuple:
        table, row = env[alias]
        if self.schema is not None and table.name in self.schema.entities:
            cols = [p.name for p in self.schema.fields(table.name)
                    if isinstance(p.part, Base) and p.kind is not OpticKind.FOLD]
        else:
            cols = list(table.columns)
        return tuple(row[c] for c in cols)

    def envs(self, s: Select, outer: Env) -> Iterable[Env]:
        if s.from_ is None:
            yield dict(outer)
            return
        f = s.from_
        partial = [dict(outer, **{f.alias: (self.table(f.table), r)}) for r in self.rows(f.table)]
        bound = [f.alias]
        for j in f.joins:
            table = self.table(j.table)
            rows = self.rows(j.table)
            nxt = []
            for env in partial:
                for r in rows:
                    e2 = dict(env)
                    e2[j.alias] = (table, r)
                    if self.join_holds(j.cond, e2, bound, j.alias):
                        nxt.append(e2)
            partial = nxt
            bound.append(j.alias)
        yield from partial

    def join_holds(self, cond, env: Env, bound: List[str], alias: str) -> bool:
        if isinstance(cond, On):
            return _compare("=", self.value(cond.left, env), self.value(cond.right, env)) is True
        parent = cond.parent
        if parent is None:
            # textual USING: the nearest earlier table carrying the column
            for a in reversed(bound):
                if cond.column in env[a][1]:
                    parent = a
                    break
            else:
                raise SqlExecError(f"USING {cond.column}: no earlier table has that column")
        return _compare("=", _lookup(env, parent, cond.column),
                        _lookup(env, alias, cond.column)) is True

    def select(self, s: Select, outer: Env) -> List[tuple]:
        out = []
        for env in self.envs(s, outer):
            if all(self.value(c, env) is True for c in s.where):
                row: tuple = ()
                for c in s.columns:
                    row += self.star(c.alias, env) if isinstance(c, Star) else (self.value(c, env),)
                out.append(row)
        return out


def exec_sql(stmt: Union[Select, str], tables, schema: Optional[Schema] = None) -> List[tuple]:
    """Rows produced by a statement over `tables` (a dict or iterable of RelTable).

    With a schema, `alias.*` expands to the entity's own single-valued base
    fields in field order, leaving out key columns added by shredding.
    """
    if isinstance(stmt, str):
        stmt = parse_sql(stmt)
    if not isinstance(tables, Mapping):
        tables = {t.name: t for t in tables}
    return _Exec(tables, schema).select(stmt, {})
