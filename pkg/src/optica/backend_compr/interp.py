"""Reference bag interpreter for comprehension terms.

Records are dicts, bags are lists, and a missing (NULL) column is None;
comparisons involving None are unknown and guards treat unknown as false.
"""
from __future__ import annotations

from typing import Callable, Dict, List, Mapping, Optional

from ..model import B, I, L, P, R, RelTable, S, Value
from .ir import (App, ComprError, Cond, ConstB, EmptyBag, Exists, FieldProj, For, Lam, PrimOp,
                 RecordLit, TableRef, Term, Var, Yield)


class InterpError(ComprError):
    pass


def from_value(v: Value):
    """Model value in the interpreter's representation (pairs become `_1`/`_2` records)."""
    if isinstance(v, (I, B, S)):
        return v.value
    if isinstance(v, P):
        return {"_1": from_value(v.left), "_2": from_value(v.right)}
    if isinstance(v, R):
        return {k: from_value(x) for k, x in v.fields}
    if isinstance(v, L):
        return [from_value(x) for x in v.items]
    raise TypeError(v)


def to_plain(x):
    """`_1`/`_2` records back to tuples, for comparison with model results."""
    if isinstance(x, dict):
        if set(x) == {"_1", "_2"}:
            return (to_plain(x["_1"]), to_plain(x["_2"]))
        return {k: to_plain(v) for k, v in x.items()}
    if isinstance(x, list):
        return [to_plain(v) for v in x]
    return x


def _table_rows(t: RelTable) -> List[dict]:
    return [dict(zip(t.columns, r)) for r in t.rows]


class _Interp:
    def __init__(self, tables: Mapping[str, RelTable]):
        self.tables = tables

    def bag(self, t: Term, env) -> list:
        x = self.ev(t, env)
        if not isinstance(x, list):
            raise InterpError(f"expected a bag, got {x!r}")
        return x

    def ev(self, t: Term, env: Dict[str, object]):
        if isinstance(t, Var):
            try:
                return env[t.name]
            except KeyError:
                raise InterpError(f"unbound variable {t.name}") from None
        if isinstance(t, Lam):
            return lambda arg, t=t, env=env: self.ev(t.body, {**env, t.param: arg})
        if isinstance(t, App):
            f = self.ev(t.fun, env)
            if not callable(f):
                raise InterpError("application of a non-function")
            return f(self.ev(t.arg, env))
        if isinstance(t, RecordLit):
            return {k: self.ev(v, env) for k, v in t.fields}
        if isinstance(t, FieldProj):
            r = self.ev(t.expr, env)
            if not isinstance(r, dict) or t.field not in r:
                raise InterpError(f"no field {t.field!r} in {r!r}")
            return r[t.field]
        if isinstance(t, ConstB):
            return t.value
        if isinstance(t, PrimOp):
            return self.op(t, env)
        if isinstance(t, For):
            out = []
            for x in self.bag(t.source, env):
                out.extend(self.bag(t.body, {**env, t.binder: x}))
            return out
        if isinstance(t, Cond):
            return self.bag(t.body, env) if self.ev(t.test, env) is True else []
        if isinstance(t, Yield):
            return [self.ev(t.expr, env)]
        if isinstance(t, Exists):
            return len(self.bag(t.expr, env)) > 0
        if isinstance(t, TableRef):
            if t.name not in self.tables:
                raise InterpError(f"unknown table {t.name!r}")
            return _table_rows(self.tables[t.name])
        if isinstance(t, EmptyBag):
            return []
        raise TypeError(t)

    def op(self, t: PrimOp, env):
        if t.op == "and":
            vals = [self.ev(a, env) for a in t.args]
            if any(v is False for v in vals):
                return False
            return None if any(v is None for v in vals) else True
        vals = [self.ev(a, env) for a in t.args]
        if any(v is None for v in vals):
            return None
        if t.op == "not":
            return not vals[0]
        a, b = vals
        if t.op == "=":
            if type(a) is not type(b):
                raise InterpError(f"cannot compare {a!r} with {b!r}")
            return a == b
        if type(a) is not int or type(b) is not int:
            raise InterpError(f"'{t.op}' needs integers")
        return a > b if t.op == ">" else a - b


def interpret(t: Term, tables: Optional[Mapping[str, RelTable]] = None,
              env: Optional[Dict[str, object]] = None):
    if tables is not None and not isinstance(tables, Mapping):
        tables = {x.name: x for x in tables}
    return _Interp(tables or {}).ev(t, dict(env or {}))


def run_query(fun: Term, root: Value):
    """Apply a query term directly to a nested model value."""
    f: Callable = interpret(fun)
    return f(from_value(root))
