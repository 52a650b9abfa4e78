"""Comprehension terms: lambdas, records, and bag comprehensions (for / if / yield / exists)."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import FrozenSet, Iterable, Tuple, Union

from ..model import OpticaError


class ComprError(OpticaError):
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lam:
    param: str
    body: "Term"


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True)
class RecordLit:
    fields: Tuple[Tuple[str, "Term"], ...]

    def get(self, name: str) -> "Term":
        for k, v in self.fields:
            if k == name:
                return v
        raise ComprError(f"record has no field {name!r}")


@dataclass(frozen=True)
class FieldProj:
    expr: "Term"
    field: str


@dataclass(frozen=True)
class ConstB:
    value: Union[int, bool, str]


OPS = ("not", ">", "=", "-", "and")


@dataclass(frozen=True)
class PrimOp:
    op: str  # one of OPS; "and" is n-ary
    args: Tuple["Term", ...]


@dataclass(frozen=True)
class For:
    binder: str
    source: "Term"
    body: "Term"


@dataclass(frozen=True)
class Cond:
    test: "Term"
    body: "Term"


@dataclass(frozen=True)
class Yield:
    expr: "Term"


@dataclass(frozen=True)
class Exists:
    expr: "Term"


@dataclass(frozen=True)
class TableRef:
    name: str


@dataclass(frozen=True)
class EmptyBag:
    pass


Term = Union[Var, Lam, App, RecordLit, FieldProj, ConstB, PrimOp, For, Cond, Yield, Exists,
             TableRef, EmptyBag]

TRUE = ConstB(True)
FALSE = ConstB(False)
UNIT = RecordLit(())


def record(**fields) -> RecordLit:
    return RecordLit(tuple(fields.items()))


def eq(a: Term, b: Term) -> PrimOp:
    return PrimOp("=", (a, b))


def neg(a: Term) -> PrimOp:
    return PrimOp("not", (a,))


def conjuncts(t: Term) -> Tuple[Term, ...]:
    if isinstance(t, PrimOp) and t.op == "and":
        return tuple(c for a in t.args for c in conjuncts(a))
    return (t,)


def conj(*terms: Term) -> Term:
    """Flattened n-ary conjunction; a single conjunct stands alone."""
    cs = tuple(c for t in terms for c in conjuncts(t))
    if not cs:
        return TRUE
    return cs[0] if len(cs) == 1 else PrimOp("and", cs)


# -- scoping -----------------------------------------------------------------

def children(t: Term) -> Tuple[Term, ...]:
    if isinstance(t, (Var, ConstB, TableRef, EmptyBag)):
        return ()
    if isinstance(t, Lam):
        return (t.body,)
    if isinstance(t, App):
        return (t.fun, t.arg)
    if isinstance(t, RecordLit):
        return tuple(v for _, v in t.fields)
    if isinstance(t, (FieldProj, Yield, Exists)):
        return (t.expr,)
    if isinstance(t, PrimOp):
        return t.args
    if isinstance(t, For):
        return (t.source, t.body)
    if isinstance(t, Cond):
        return (t.test, t.body)
    raise TypeError(t)


def free_vars(t: Term) -> FrozenSet[str]:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.param}
    if isinstance(t, For):
        return free_vars(t.source) | (free_vars(t.body) - {t.binder})
    out: FrozenSet[str] = frozenset()
    for c in children(t):
        out |= free_vars(c)
    return out


def binders(t: Term) -> Iterable[str]:
    if isinstance(t, Lam):
        yield t.param
    if isinstance(t, For):
        yield t.binder
    for c in children(t):
        yield from binders(c)


class Fresh:
    """Name supply: `base`, then `base1`, `base2`, ... skipping anything already taken."""

    def __init__(self, taken: Iterable[str] = ()):
        self.taken = set(taken)

    def __call__(self, base: str = "x") -> str:
        base = base.rstrip("0123456789") or "x"
        for name in itertools.chain((base,), (f"{base}{i}" for i in itertools.count(1))):
            if name not in self.taken:
                self.taken.add(name)
                return name
        raise AssertionError("unreachable")


def subst(t: Term, name: str, value: Term, fresh: Fresh = None) -> Term:
    """Capture-avoiding t[name := value]."""
    fv = free_vars(value)
    if fresh is None:
        fresh = Fresh(set(binders(t)) | set(binders(value)) | fv | free_vars(t))
    return _subst(t, name, value, fv, fresh)


def _rebind(binder: str, body: Term, name: str, fv, fresh: Fresh):
    """Rename `binder` in `body` when it would capture a free variable of the value."""
    if binder in fv and name in free_vars(body):
        new = fresh(binder)
        body = _subst(body, binder, Var(new), frozenset((new,)), fresh)
        return new, body
    return binder, body


def _subst(t: Term, name: str, value: Term, fv, fresh: Fresh) -> Term:
    if isinstance(t, Var):
        return value if t.name == name else t
    if isinstance(t, (ConstB, TableRef, EmptyBag)):
        return t
    if name not in free_vars(t):
        return t
    if isinstance(t, Lam):
        param, body = _rebind(t.param, t.body, name, fv, fresh)
        return Lam(param, _subst(body, name, value, fv, fresh))
    if isinstance(t, For):
        src = _subst(t.source, name, value, fv, fresh)
        if t.binder == name:
            return For(t.binder, src, t.body)
        binder, body = _rebind(t.binder, t.body, name, fv, fresh)
        return For(binder, src, _subst(body, name, value, fv, fresh))
    s = lambda c: _subst(c, name, value, fv, fresh)  # noqa: E731
    if isinstance(t, App):
        return App(s(t.fun), s(t.arg))
    if isinstance(t, RecordLit):
        return RecordLit(tuple((k, s(v)) for k, v in t.fields))
    if isinstance(t, FieldProj):
        return FieldProj(s(t.expr), t.field)
    if isinstance(t, PrimOp):
        return PrimOp(t.op, tuple(s(a) for a in t.args))
    if isinstance(t, Cond):
        return Cond(s(t.test), s(t.body))
    if isinstance(t, Yield):
        return Yield(s(t.expr))
    if isinstance(t, Exists):
        return Exists(s(t.expr))
    raise TypeError(t)


def size(t: Term) -> int:
    return 1 + sum(size(c) for c in children(t))


# -- printing ----------------------------------------------------------------

def _lit(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    return "'" + v.replace("'", "''") + "'"


_INFIX = {">": ">", "=": "=", "-": "-", "and": "∧"}


def _atomic(t: Term) -> bool:
    return isinstance(t, (Var, ConstB, TableRef, EmptyBag, RecordLit, FieldProj))


def _p(t: Term) -> str:
    text = print_compr(t)
    return text if _atomic(t) else f"({text})"


def print_compr(t: Term) -> str:
    """One-line text in for / if-then / yield notation."""
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Lam):
        return f"fun({t.param}) -> {print_compr(t.body)}"
    if isinstance(t, App):
        return f"{_p(t.fun)} {_p(t.arg)}"
    if isinstance(t, RecordLit):
        return "{" + ", ".join(f"{k} = {print_compr(v)}" for k, v in t.fields) + "}"
    if isinstance(t, FieldProj):
        return f"{_p(t.expr)}.{t.field}"
    if isinstance(t, ConstB):
        return _lit(t.value)
    if isinstance(t, PrimOp):
        if t.op == "not":
            a = t.args[0]
            return f"not {print_compr(a) if isinstance(a, Exists) else _p(a)}"
        if t.op == "and":
            # comparisons, negations and exists bind tighter than the conjunction
            return " ∧ ".join(print_compr(a) if isinstance(a, (PrimOp, Exists)) else _p(a)
                              for a in t.args)
        return f" {_INFIX[t.op]} ".join(_p(a) for a in t.args)
    if isinstance(t, For):
        return f"for {t.binder} in {_p(t.source)} do {print_compr(t.body)}"
    if isinstance(t, Cond):
        return f"if {print_compr(t.test)} then {print_compr(t.body)}"
    if isinstance(t, Yield):
        return f"yield {_p(t.expr)}"
    if isinstance(t, Exists):
        return f"exists {_p(t.expr)}"
    if isinstance(t, TableRef):
        return t.name
    if isinstance(t, EmptyBag):
        return "[]"
    raise TypeError(t)
