"""Optic and query expression trees, the type checker, casts and derived forms."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, Optional, Tuple, Union

from .model import (BOOL, INT, Base, Cardinality, Entity, OpticaError, OpticKind,
                    OpticType, Pair, QueryType, Schema, type_of_base, I, B, S)

GETTER, AFFINE, FOLD = OpticKind.GETTER, OpticKind.AFFINE, OpticKind.FOLD


@dataclass(frozen=True)
class Span:
    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError("span start after end")


class OpticTypeError(OpticaError):
    def __init__(self, message: str, span: Optional[Span] = None):
        super().__init__(message)
        self.message = message
        self.span = span


@dataclass(frozen=True)
class TVar:
    """Unification variable standing for a not-yet-known model type."""
    ident: int

    def __str__(self) -> str:
        return "'" + "abcdefghijklmnopqrstuvwxyz"[self.ident % 26] + (str(self.ident // 26) if self.ident >= 26 else "")


# -- optic expressions -------------------------------------------------------
# Every node carries `ty` (filled by the checker) and `span` (filled by the
# parser); neither takes part in equality.

def _meta():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Id:
    kind: OpticKind = GETTER
    ty: Optional[OpticType] = _meta()
    span: Optional[Span] = _meta()


@dataclass(frozen=True)
class Seq:
    kind: Optional[OpticKind]  # None: decided by the checker
    left: "Optic"
    right: "Optic"
    ty: Optional[OpticType] = _meta()
    span: Optional[Span] = _meta()


@dataclass(frozen=True)
class Fork:
    left: "Optic"
    right: "Optic"
    ty: Optional[OpticType] = _meta()
    span: Optional[Span] = _meta()


@dataclass(frozen=True)
class Like:
    value: Union[I, B, S]
    ty: Optional[OpticType] = _meta()
    span: Optional[Span] = _meta()


@dataclass(frozen=True)
class Not:
    arg: "Optic"
    ty: Optional[OpticType] = _meta()
    span: Optional[Span] = _meta()


@dataclass(frozen=True)
class Gt:
    left: "Optic"
    right: "Optic"
    ty: Optional[OpticType] = _meta()
    span: Optional[Span] = _meta()


@dataclass(frozen=True)
class Eq:
    left: "Optic"
    right: "Optic"
    ty: Optional[OpticType] = _meta()
    span: Optional[Span] = _meta()


@dataclass(frozen=True)
class Sub:
    left: "Optic"
    right: "Optic"
    ty: Optional[OpticType] = _meta()
    span: Optional[Span] = _meta()


@dataclass(frozen=True)
class Filtered:
    pred: "Optic"
    ty: Optional[OpticType] = _meta()
    span: Optional[Span] = _meta()


@dataclass(frozen=True)
class NonEmpty:
    arg: "Optic"
    ty: Optional[OpticType] = _meta()
    span: Optional[Span] = _meta()


@dataclass(frozen=True)
class ToAf:
    arg: "Optic"
    ty: Optional[OpticType] = _meta()
    span: Optional[Span] = _meta()


@dataclass(frozen=True)
class ToFl:
    arg: "Optic"
    ty: Optional[OpticType] = _meta()
    span: Optional[Span] = _meta()


@dataclass(frozen=True)
class Prim:
    name: str
    ty: Optional[OpticType] = _meta()
    span: Optional[Span] = _meta()


Optic = Union[Id, Seq, Fork, Like, Not, Gt, Eq, Sub, Filtered, NonEmpty, ToAf, ToFl, Prim]
BINARY = (Gt, Eq, Sub)


@dataclass(frozen=True)
class Get:
    optic: Optic
    ty: Optional[QueryType] = _meta()
    span: Optional[Span] = _meta()


@dataclass(frozen=True)
class Preview:
    optic: Optic
    ty: Optional[QueryType] = _meta()
    span: Optional[Span] = _meta()


@dataclass(frozen=True)
class GetAll:
    optic: Optic
    ty: Optional[QueryType] = _meta()
    span: Optional[Span] = _meta()


Query = Union[Get, Preview, GetAll]
QUERY_KIND = {Get: GETTER, Preview: AFFINE, GetAll: FOLD}
QUERY_CARD = {Get: Cardinality.ONE, Preview: Cardinality.OPTION, GetAll: Cardinality.MANY}


def children(e) -> Tuple:
    if isinstance(e, (Seq, Fork, Gt, Eq, Sub)):
        return (e.left, e.right)
    if isinstance(e, (Not, NonEmpty, ToAf, ToFl)):
        return (e.arg,)
    if isinstance(e, Filtered):
        return (e.pred,)
    return ()


def walk(e) -> Iterator:
    """Pre-order traversal."""
    yield e
    for c in children(e):
        yield from walk(c)


def kind_of(e) -> OpticKind:
    if e.ty is None:
        raise ValueError("expression has not been type checked")
    return e.ty.kind


def erase_casts(e):
    """Drop ToAf/ToFl wrappers and forget Seq kinds (surface-level shape)."""
    if isinstance(e, (ToAf, ToFl)):
        return erase_casts(e.arg)
    if isinstance(e, Seq):
        return Seq(None, erase_casts(e.left), erase_casts(e.right))
    if isinstance(e, (Fork, Gt, Eq, Sub)):
        return type(e)(erase_casts(e.left), erase_casts(e.right))
    if isinstance(e, (Not, NonEmpty)):
        return type(e)(erase_casts(e.arg))
    if isinstance(e, Filtered):
        return Filtered(erase_casts(e.pred))
    return replace(e, ty=None, span=None)


# -- derived definitions -----------------------------------------------------

def desugar_empty(fl: Optic) -> Optic:
    return Not(NonEmpty(fl))


def desugar_all(fl: Optic, p: Optic) -> Optic:
    return desugar_empty(Seq(None, fl, Filtered(Not(p))))


def desugar_any(fl: Optic, p: Optic) -> Optic:
    return Not(desugar_all(fl, Not(p)))


def desugar_elem(fl: Optic, a) -> Optic:
    return desugar_any(fl, Eq(Id(GETTER), Like(a)))


# -- casts -------------------------------------------------------------------

def auto_cast(e: Optic, have: OpticKind, need: OpticKind) -> Optic:
    """Wrap `e` (of kind `have`) in the casts that lift it to `need`."""
    if need < have:
        raise OpticTypeError(f"cannot use a {have} where a {need} is expected", getattr(e, "span", None))
    span = getattr(e, "span", None)
    if have is GETTER and need >= AFFINE:
        e = ToAf(e, ty=_lift(e.ty, AFFINE), span=span)
    if have <= AFFINE and need is FOLD:
        e = ToFl(e, ty=_lift(e.ty, FOLD), span=span)
    return e


def _lift(t: Optional[OpticType], k: OpticKind) -> Optional[OpticType]:
    return None if t is None else OpticType(k, t.whole, t.part)


# -- checker -----------------------------------------------------------------

class _Checker:
    def __init__(self, schema: Schema):
        self.schema = schema
        self.subst: Dict[int, object] = {}
        self.fresh_ids = itertools.count()

    def fresh(self) -> TVar:
        return TVar(next(self.fresh_ids))

    def resolve(self, t):
        while isinstance(t, TVar) and t.ident in self.subst:
            t = self.subst[t.ident]
        if isinstance(t, Pair):
            return Pair(self.resolve(t.left), self.resolve(t.right))
        return t

    def occurs(self, v: TVar, t) -> bool:
        t = self.resolve(t)
        if t == v:
            return True
        return isinstance(t, Pair) and (self.occurs(v, t.left) or self.occurs(v, t.right))

    def unify(self, a, b, span, what: str) -> None:
        a, b = self.resolve(a), self.resolve(b)
        if a == b:
            return
        if isinstance(a, TVar):
            if self.occurs(a, b):
                raise OpticTypeError(f"{what}: infinite type", span)
            self.subst[a.ident] = b
            return
        if isinstance(b, TVar):
            self.unify(b, a, span, what)
            return
        if isinstance(a, Pair) and isinstance(b, Pair):
            self.unify(a.left, b.left, span, what)
            self.unify(a.right, b.right, span, what)
            return
        raise OpticTypeError(f"{what}: {_show(a)} does not match {_show(b)}", span)

    # returns (annotated expr, kind, part); the whole is the `whole` argument
    def check(self, e, whole):
        span = getattr(e, "span", None)
        if isinstance(e, Id):
            return self.done(e, e.kind, whole, whole)
        if isinstance(e, Prim):
            return self.prim(e, whole)
        if isinstance(e, Seq):
            l, kl, mid = self.check(e.left, whole)
            r, kr, part = self.check(e.right, mid)
            k = e.kind if e.kind is not None else max(kl, kr)
            l = self.cast(l, kl, k, "left side of >>>")
            r = self.cast(r, kr, k, "right side of >>>")
            return self.done(Seq(k, l, r, span=span), k, whole, part)
        if isinstance(e, Fork):
            l, pl = self.getter(e.left, whole, "left side of ***")
            r, pr = self.getter(e.right, whole, "right side of ***")
            return self.done(Fork(l, r, span=span), GETTER, whole, Pair(pl, pr))
        if isinstance(e, Like):
            if not isinstance(e.value, (I, B, S)):
                raise OpticTypeError(f"like needs a base constant, got {e.value!r}", span)
            return self.done(Like(e.value, span=span), GETTER, whole, type_of_base(e.value))
        if isinstance(e, Not):
            a, pa = self.getter(e.arg, whole, "argument of not")
            self.unify(pa, BOOL, span, "argument of not")
            return self.done(Not(a, span=span), GETTER, whole, BOOL)
        if isinstance(e, (Gt, Sub)):
            op = ">" if isinstance(e, Gt) else "-"
            l, pl = self.getter(e.left, whole, f"left side of {op}")
            self.unify(pl, INT, getattr(e.left, "span", span), f"left side of {op}")
            r, pr = self.getter(e.right, whole, f"right side of {op}")
            self.unify(pr, INT, getattr(e.right, "span", span), f"right side of {op}")
            return self.done(type(e)(l, r, span=span), GETTER, whole, BOOL if isinstance(e, Gt) else INT)
        if isinstance(e, Eq):
            l, pl = self.getter(e.left, whole, "left side of ==")
            r, pr = self.getter(e.right, whole, "right side of ==")
            self.unify(pl, pr, span, "operands of ==")
            t = self.resolve(pl)
            if not isinstance(t, (Base, TVar)):
                raise OpticTypeError(f"== compares base values only, got {_show(t)}", span)
            return self.done(Eq(l, r, span=span), GETTER, whole, BOOL)
        if isinstance(e, Filtered):
            p, pp = self.getter(e.pred, whole, "predicate of filtered")
            self.unify(pp, BOOL, getattr(e.pred, "span", span), "predicate of filtered")
            return self.done(Filtered(p, span=span), AFFINE, whole, whole)
        if isinstance(e, NonEmpty):
            a, ka, _ = self.check(e.arg, whole)
            a = self.cast(a, ka, FOLD, "argument of nonEmpty")
            return self.done(NonEmpty(a, span=span), GETTER, whole, BOOL)
        if isinstance(e, ToAf):
            a, ka, part = self.check(e.arg, whole)
            if ka is not GETTER:
                raise OpticTypeError(f"to_af expects a getter, got a {ka}", span)
            return self.done(ToAf(a, span=span), AFFINE, whole, part)
        if isinstance(e, ToFl):
            a, ka, part = self.check(e.arg, whole)
            if ka is FOLD:
                raise OpticTypeError("to_fl expects an affine fold, got a fold", span)
            a = self.cast(a, ka, AFFINE, "argument of to_fl")
            return self.done(ToFl(a, span=span), FOLD, whole, part)
        raise OpticTypeError(f"not an optic expression: {e!r}", span)

    def getter(self, e, whole, what):
        a, k, part = self.check(e, whole)
        if k is not GETTER:
            raise OpticTypeError(f"{what} must be a getter, got a {k}", getattr(e, "span", None))
        return a, part

    def cast(self, e, have, need, what):
        if need < have:
            raise OpticTypeError(f"{what}: cannot use a {have} where a {need} is expected",
                                 getattr(e, "span", None))
        return auto_cast(e, have, need)

    def done(self, e, kind, whole, part):
        return replace(e, ty=OpticType(kind, whole, part)), kind, part

    def prim(self, e: Prim, whole):
        w = self.resolve(whole)
        span = e.span
        if isinstance(w, Entity):
            p = self.schema.prim(w.name, e.name)
            if p is None:
                if not self.schema.prims_named(e.name):
                    raise OpticTypeError(f"unknown optic {e.name!r}", span)
                raise OpticTypeError(f"optic {e.name!r} does not apply to {w.name}", span)
        elif isinstance(w, TVar):
            found = self.schema.prims_named(e.name)
            if not found:
                raise OpticTypeError(f"unknown optic {e.name!r}", span)
            if len(found) > 1:
                raise OpticTypeError(f"optic {e.name!r} is ambiguous here "
                                     f"({', '.join(p.whole for p in found)})", span)
            p = found[0]
            self.unify(w, Entity(p.whole), span, f"whole of {e.name}")
        else:
            raise OpticTypeError(f"optic {e.name!r} applied to {_show(w)}, which has no optics", span)
        return self.done(Prim(e.name, span=span), p.kind, Entity(p.whole), p.part)

    def finish(self, e):
        """Substitute solved variables throughout the annotations."""
        ty = e.ty
        if isinstance(ty, OpticType):
            ty = OpticType(ty.kind, self.resolve(ty.whole), self.resolve(ty.part))
        elif isinstance(ty, QueryType):
            ty = QueryType(self.resolve(ty.source), ty.cardinality, self.resolve(ty.target))
        if isinstance(e, (Seq, Fork, Gt, Eq, Sub)):
            return replace(e, left=self.finish(e.left), right=self.finish(e.right), ty=ty)
        if isinstance(e, (Not, NonEmpty, ToAf, ToFl)):
            return replace(e, arg=self.finish(e.arg), ty=ty)
        if isinstance(e, Filtered):
            return replace(e, pred=self.finish(e.pred), ty=ty)
        if isinstance(e, (Get, Preview, GetAll)):
            return replace(e, optic=self.finish(e.optic), ty=ty)
        return replace(e, ty=ty)


def _show(t) -> str:
    return str(t)


def _start(schema: Schema, whole, checker: _Checker):
    if whole is None:
        return checker.fresh()
    if isinstance(whole, str):
        return Entity(whole)
    return whole


def check(e: Optic, schema: Schema, whole=None) -> Optic:
    """Type check `e`, inserting casts where needed; returns the annotated tree."""
    c = _Checker(schema)
    out, _, _ = c.check(e, _start(schema, whole, c))
    return c.finish(out)


def typecheck(e: Optic, schema: Schema, whole=None) -> OpticType:
    return check(e, schema, whole).ty


def check_query(q: Query, schema: Schema, whole=None) -> Query:
    c = _Checker(schema)
    need = QUERY_KIND[type(q)]
    w = _start(schema, whole, c)
    inner, k, part = c.check(q.optic, w)
    if k > need:
        name = {Get: "get", Preview: "preview", GetAll: "getAll"}[type(q)]
        raise OpticTypeError(f"{name} needs a {need}, got a {k}", getattr(q.optic, "span", None))
    inner = auto_cast(inner, k, need)
    out = type(q)(inner, ty=QueryType(w, QUERY_CARD[type(q)], part), span=q.span)
    return c.finish(out)


def typecheck_query(q: Query, schema: Schema, whole=None) -> QueryType:
    return check_query(q, schema, whole).ty


def dump(e, indent: int = 0) -> str:
    """Debug rendering of an annotated tree, one node per line."""
    pad = "  " * indent
    label = type(e).__name__
    if isinstance(e, Id):
        label += f"[{e.kind}]"
    elif isinstance(e, Seq):
        label += f"[{e.kind}]"
    elif isinstance(e, Like):
        label += f" {e.value!r}"
    elif isinstance(e, Prim):
        label += f" {e.name}"
    ty = f" : {e.ty}" if e.ty is not None else ""
    lines = [f"{pad}{label}{ty}"]
    kids = (e.optic,) if isinstance(e, (Get, Preview, GetAll)) else children(e)
    for c in kids:
        lines.append(dump(c, indent + 1))
    return "\n".join(lines)
