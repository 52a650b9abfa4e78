"""Standard semantics: checked optics as functions over nested values.

All three optic kinds share one engine: an optic maps a value to the list of
parts it selects (a getter always selects exactly one).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Union

from .ast import (AFFINE, FOLD, GETTER, Eq, Filtered, Fork, Get, GetAll, Gt, Id, Like,
                  NonEmpty, Not, Optic, Preview, Prim, Query, Seq, Sub, ToAf, ToFl)
from .model import B, I, L, OpticaError, P, R, Value


class EvalError(OpticaError):
    pass


@dataclass(frozen=True)
class One:
    value: Value

    def __str__(self) -> str:
        return render(self.value)


@dataclass(frozen=True)
class Opt:
    value: Optional[Value]

    def __str__(self) -> str:
        return "none" if self.value is None else f"some({render(self.value)})"


@dataclass(frozen=True)
class Many:
    values: tuple

    def __str__(self) -> str:
        return "[" + ",".join(render(v) for v in self.values) + "]"


ResultSet = Union[One, Opt, Many]


def render(v) -> str:
    """Stable text for results: tuples in parens, lists in brackets."""
    return str(v)


def _bool(vs: List, what: str) -> bool:
    (v,) = vs
    if not isinstance(v, B):
        raise EvalError(f"{what}: expected a boolean, got {v}")
    return v.value


def _int(v, what: str) -> int:
    if not isinstance(v, I):
        raise EvalError(f"{what}: expected an integer, got {v}")
    return v.value


def _prim(e: Prim, v) -> List:
    kind = e.ty.kind
    if isinstance(v, L):
        # the root collection: a root whose only optic is a fold
        if kind is not FOLD:
            raise EvalError(f"{e.name}: cannot read a field of a list")
        return list(v.items)
    if not isinstance(v, R):
        raise EvalError(f"{e.name}: expected a record, got {v}")
    try:
        x = v[e.name]
    except KeyError:
        raise EvalError(f"{v.entity} has no field {e.name!r}") from None
    if kind is GETTER:
        return [x]
    return list(x.items)


def eval_optic(e: Optic, v: Value) -> List[Value]:
    """Parts selected by a checked optic from `v`."""
    if isinstance(e, Id):
        return [v]
    if isinstance(e, Prim):
        out = _prim(e, v)
    elif isinstance(e, Seq):
        out = [c for b in eval_optic(e.left, v) for c in eval_optic(e.right, b)]
    elif isinstance(e, Fork):
        (a,) = eval_optic(e.left, v)
        (b,) = eval_optic(e.right, v)
        out = [P(a, b)]
    elif isinstance(e, Like):
        out = [e.value]
    elif isinstance(e, Not):
        out = [B(not _bool(eval_optic(e.arg, v), "not"))]
    elif isinstance(e, (Gt, Sub)):
        (a,) = eval_optic(e.left, v)
        (b,) = eval_optic(e.right, v)
        x, y = _int(a, type(e).__name__), _int(b, type(e).__name__)
        out = [B(x > y)] if isinstance(e, Gt) else [I(x - y)]
    elif isinstance(e, Eq):
        (a,) = eval_optic(e.left, v)
        (b,) = eval_optic(e.right, v)
        out = [B(a == b)]
    elif isinstance(e, Filtered):
        out = [v] if _bool(eval_optic(e.pred, v), "filtered") else []
    elif isinstance(e, NonEmpty):
        out = [B(len(eval_optic(e.arg, v)) > 0)]
    elif isinstance(e, (ToAf, ToFl)):
        out = eval_optic(e.arg, v)
    else:
        raise EvalError(f"not an optic expression: {e!r}")
    _check_cardinality(e, out)
    return out


def _check_cardinality(e, out: List) -> None:
    k = e.ty.kind if e.ty is not None else None
    if k is GETTER and len(out) != 1:
        raise EvalError(f"getter selected {len(out)} values")
    if k is AFFINE and len(out) > 1:
        raise EvalError(f"affine fold selected {len(out)} values")


def eval_query(q: Query, v: Value) -> ResultSet:
    out = eval_optic(q.optic, v)
    if isinstance(q, Get):
        (x,) = out
        return One(x)
    if isinstance(q, Preview):
        return Opt(out[0] if out else None)
    if isinstance(q, GetAll):
        return Many(tuple(out))
    raise EvalError(f"not a query: {q!r}")


# -- brute-force oracle for the derived combinators -------------------------

def _holds(p: Optic, x: Value) -> bool:
    return _bool(eval_optic(p, x), "predicate")


def oracle_empty(fl: Optic, v: Value) -> bool:
    return not eval_optic(fl, v)


def oracle_all(fl: Optic, p: Optic, v: Value) -> bool:
    for x in eval_optic(fl, v):
        if not _holds(p, x):
            return False
    return True


def oracle_any(fl: Optic, p: Optic, v: Value) -> bool:
    for x in eval_optic(fl, v):
        if _holds(p, x):
            return True
    return False


def oracle_elem(fl: Optic, a, v: Value) -> bool:
    return a in eval_optic(fl, v)


def eval_derived_oracle(fl: Optic, p: Optic, a, v: Value) -> dict:
    """Direct list-based answers for empty/all/any/elem on one input.

    `fl` must be a checked fold and `p` a checked boolean getter over its part.
    """
    return {
        "empty": oracle_empty(fl, v),
        "all": oracle_all(fl, p, v),
        "any": oracle_any(fl, p, v),
        "elem": oracle_elem(fl, a, v),
    }
