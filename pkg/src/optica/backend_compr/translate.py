"""Optic expressions as comprehension terms, plus the flat-to-nested adapter."""
from __future__ import annotations

from typing import List, Mapping, Optional, Tuple

from ..ast import (Eq, Filtered, Fork, Gt, Id, Like, NonEmpty, Not, Optic, Prim, Query, Seq,
                   Sub, ToAf, ToFl)
from ..model import Base, Entity, MissingPk, OpticKind, Schema
from .ir import (App, ComprError, ConstB, Exists, FieldProj, For, Fresh, Lam, PrimOp,
                 RecordLit, TableRef, Term, Var, Cond, Yield, conj, eq, neg, record)


def _hint(ty) -> str:
    whole = getattr(ty, "whole", None)
    if isinstance(whole, Entity):
        return whole.name[0].lower()
    return "a"


class _Tr:
    def __init__(self, schema: Schema):
        self.schema = schema
        self.fresh = Fresh()

    def lam(self, e, body_of) -> Lam:
        a = self.fresh(_hint(e.ty))
        return Lam(a, body_of(Var(a)))

    def bag(self, e) -> bool:
        return e.ty.kind is not OpticKind.GETTER

    def tr(self, e: Optic) -> Term:
        if isinstance(e, Id):
            return self.lam(e, lambda a: Yield(a) if self.bag(e) else a)
        if isinstance(e, Prim):
            coll = self.schema.root_collection
            whole = e.ty.whole
            if (coll is not None and isinstance(whole, Entity) and whole.name == self.schema.root
                    and e.name == coll.name):
                # the root value is the collection itself
                return self.lam(e, lambda a: a)
            return self.lam(e, lambda a: FieldProj(a, e.name))
        if isinstance(e, Seq):
            g, h = self.tr(e.left), self.tr(e.right)
            if not self.bag(e):
                return self.lam(e, lambda a: App(h, App(g, a)))
            b = self.fresh(_hint(e.right.ty))
            c = self.fresh("c")
            return self.lam(e, lambda a: For(b, App(g, a), For(c, App(h, Var(b)), Yield(Var(c)))))
        if isinstance(e, Fork):
            g, h = self.tr(e.left), self.tr(e.right)
            return self.lam(e, lambda a: RecordLit((("_1", App(g, a)), ("_2", App(h, a)))))
        if isinstance(e, Like):
            return self.lam(e, lambda a: ConstB(e.value.value))
        if isinstance(e, Not):
            g = self.tr(e.arg)
            return self.lam(e, lambda a: neg(App(g, a)))
        if isinstance(e, (Gt, Eq, Sub)):
            op = {Gt: ">", Eq: "=", Sub: "-"}[type(e)]
            g, h = self.tr(e.left), self.tr(e.right)
            return self.lam(e, lambda a: PrimOp(op, (App(g, a), App(h, a))))
        if isinstance(e, Filtered):
            p = self.tr(e.pred)
            return self.lam(e, lambda a: Cond(App(p, a), Yield(a)))
        if isinstance(e, ToAf):
            g = self.tr(e.arg)
            return self.lam(e, lambda a: Yield(App(g, a)))
        if isinstance(e, NonEmpty):
            g = self.tr(e.arg)
            return self.lam(e, lambda a: Exists(App(g, a)))
        if isinstance(e, ToFl):
            return self.tr(e.arg)
        raise ComprError(f"not an optic expression: {e!r}")


def compr_optic(e: Optic, schema: Schema) -> Term:
    """Closed function term for a checked optic.

    Getters map to scalar-valued functions, affine folds and folds to
    bag-valued ones (an optional result is a bag of at most one element).
    """
    return _Tr(schema).tr(e)


def compr_query(q: Query, schema: Schema) -> Term:
    return compr_optic(q.optic, schema)


# -- flat to nested ----------------------------------------------------------

class _Adapter:
    def __init__(self, schema: Schema, pk: Mapping[str, str]):
        self.schema = schema
        self.pk_map = pk
        self.fresh = Fresh()

    def pk(self, entity: str) -> str:
        try:
            return self.pk_map[entity]
        except KeyError:
            raise MissingPk(entity) from None

    def level(self, entity: str, guard) -> Term:
        """Bag of nested `entity` records drawn from its table; `guard(x)` links it to the parent."""
        x = self.fresh(entity[0].lower())
        binds: List[Tuple[str, Term]] = [(x, TableRef(entity))]
        tests = [guard(Var(x))] if guard is not None else []
        body = Yield(self.record(entity, Var(x), binds, tests))
        if tests:
            body = Cond(conj(*tests), body)
        for name, src in reversed(binds):
            body = For(name, src, body)
        return body

    def record(self, entity: str, x: Var, binds, tests) -> RecordLit:
        fields = []
        for p in self.schema.fields(entity):
            if isinstance(p.part, Base):
                if p.kind is not OpticKind.GETTER:
                    raise ComprError(
                        f"{entity}.{p.name}: a {p.kind} over a base type has no nested encoding "
                        "in the adapter")
                fields.append((p.name, FieldProj(x, p.name)))
                continue
            target = p.part.name
            if p.kind is OpticKind.GETTER:
                # joined at this level: exactly one target row
                y = self.fresh(target[0].lower())
                binds.append((y, TableRef(target)))
                tests.append(eq(FieldProj(x, p.name), FieldProj(Var(y), self.pk(target))))
                fields.append((p.name, self.record(target, Var(y), binds, tests)))
            elif p.kind is OpticKind.AFFINE:
                key = self.pk(target)
                fields.append((p.name, self.level(
                    target, lambda y, x=x, p=p, key=key: eq(FieldProj(x, p.name), FieldProj(y, key)))))
            else:
                key = self.pk(entity)
                fields.append((p.name, self.level(
                    target, lambda y, x=x, key=key: eq(FieldProj(x, key), FieldProj(y, key)))))
        return RecordLit(tuple(fields))


def build_nested_adapter(schema: Schema, pk: Optional[Mapping[str, str]] = None) -> Term:
    """Closed term rebuilding the nested root value from the shredded tables."""
    pk = schema.pk if pk is None else pk
    ad = _Adapter(schema, pk)
    roots = schema.fields(schema.root)
    for p in roots:
        if p.kind is not OpticKind.FOLD or isinstance(p.part, Base):
            raise ComprError(f"root optic {p.name!r} must be a fold over an entity")
    coll = schema.root_collection
    if coll is not None:
        return ad.level(coll.part.name, None)
    return RecordLit(tuple((p.name, ad.level(p.part.name, None)) for p in roots))


def expertise_handwritten() -> Term:
    """Hand-written comprehension for the expertise query over the flat org tables."""
    d, e, t = Var("d"), Var("e"), Var("t")
    tasks = For("t", TableRef("Task"), Cond(
        conj(eq(FieldProj(e, "emp"), FieldProj(t, "emp")),
             eq(FieldProj(t, "tsk"), ConstB("abstract"))),
        Yield(FieldProj(t, "tsk"))))
    employees = For("e", TableRef("Employee"), Cond(
        conj(eq(FieldProj(d, "dpt"), FieldProj(e, "dpt")), neg(Exists(tasks))),
        Yield(FieldProj(e, "emp"))))
    return For("d", TableRef("Department"), Cond(neg(Exists(employees)), Yield(FieldProj(d, "dpt"))))


__all__ = ["compr_optic", "compr_query", "build_nested_adapter", "expertise_handwritten", "record"]
