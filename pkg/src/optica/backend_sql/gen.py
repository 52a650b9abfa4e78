"""SELECT generation from triplets.

Aliases t0, t1, ... are handed out in depth-first trie order; every EXISTS
subquery takes fresh aliases for the paths it introduces and reuses the
enclosing aliases only for paths that existed when its snapshot was taken.
"""
from __future__ import annotations

import itertools
from typing import Dict, List, Mapping, Optional

from ..ast import GetAll, Prim, Query, TVar, walk
from ..model import Base, MissingPk, OpticaError, OpticKind, Schema
from .sqlast import (BinOp, Col, Exists, From, IsNotNull, Join, Lit, NotE, On, Select, Star,
                     Using)
from .triplet import (EMPTY, ROOT, TEq, TGt, TLike, TNonEmpty, TNot, TNotNull, TPath, TPathSel,
                      TProj, TSub, Triplet, run)


class SqlGenError(OpticaError):
    """A query outside the translatable fragment."""


class NotFlatPart(SqlGenError):
    pass


class FoldOverBase(SqlGenError):
    pass


class NoRootFold(SqlGenError):
    pass


def check_preconditions(q: Query, schema: Schema) -> None:
    if not isinstance(q, GetAll):
        raise NoRootFold("only getAll queries can be translated to SQL")
    part = q.ty.target
    if isinstance(part, TVar) or not schema.is_flat(part):
        raise NotFlatPart(f"the selected type {part} is not flat")
    for e in walk(q.optic):
        if isinstance(e, Prim) and e.ty.kind is OpticKind.FOLD and isinstance(e.ty.part, Base):
            raise FoldOverBase(f"{e.name} is a fold over a base type; SQL columns are single-valued")


def fresh(paths, counter) -> Dict[TPath, str]:
    return {p: f"t{next(counter)}" for p in paths}


class _Gen:
    def __init__(self, schema: Schema, pk: Mapping[str, str]):
        self.schema = schema
        self.pk_map = pk
        self.counter = itertools.count()

    def pk(self, entity) -> str:
        name = getattr(entity, "name", entity)
        try:
            return self.pk_map[name]
        except KeyError:
            raise MissingPk(name) from None

    def link(self, p: TPath, rho) -> tuple:
        """Columns equating path `p` with its parent path."""
        edge, up = p[-1], p[:-1]
        if up == ROOT:
            raise NoRootFold("a nested scope starts at the root")
        if edge.kind is OpticKind.FOLD:
            key = self.pk(edge.whole)
            return Col(rho[up], key), Col(rho[p], key)
        return Col(rho[up], edge.name), Col(rho[p], self.pk(edge.part))

    def from_clause(self, local: TPath, scope_paths: List[TPath], rho) -> From:
        joins = []
        for p in scope_paths:
            if p == local:
                continue
            edge, up = p[-1], p[:-1]
            if up in scope_paths and edge.kind is OpticKind.FOLD:
                cond = Using(self.pk(edge.whole), parent=rho[up])
            else:
                # child of a path in this scope, or an extra correlated root
                left, right = self.link(p, rho)
                cond = On(left, right)
            joins.append(Join(edge.part.name, rho[p], cond))
        return From(local[-1].part.name, rho[local], tuple(joins))

    def scope(self, t: Triplet, rho, local: Optional[TPath], scope_paths: List[TPath],
              nested: bool) -> Select:
        if nested:
            columns = (Star(rho[local]),) if local is not None else (Lit(True),)
        else:
            columns = tuple(self.expr(e, rho) for e in t.select)
        frm = self.from_clause(local, scope_paths, rho) if local is not None else None
        where: List = []
        for w in t.where:
            c = self.expr(w, rho)
            if c not in where:
                where.append(c)
        if nested and local is not None and local[:-1] != ROOT:
            left, right = self.link(local, rho)
            where.append(BinOp("=", left, right))
        return Select(columns, frm, tuple(where))

    def expr(self, e, rho):
        if isinstance(e, TPathSel):
            if e.path == ROOT:
                raise NoRootFold("the root entity has no table")
            return Star(rho[e.path])
        if isinstance(e, TProj):
            if e.path == ROOT:
                raise NoRootFold(f"{e.prim.name} is a field of the root, which has no table")
            if e.prim.kind is OpticKind.FOLD:
                raise FoldOverBase(f"{e.prim.name} is a fold over a base type")
            return Col(rho[e.path], e.prim.name)
        if isinstance(e, TNotNull):
            return IsNotNull(self.expr(e.arg, rho))
        if isinstance(e, TLike):
            return Lit(e.value.value)
        if isinstance(e, TNot):
            inner = self.expr(e.arg, rho)
            return inner.arg if isinstance(inner, NotE) else NotE(inner)
        if isinstance(e, (TGt, TEq, TSub)):
            op = {TGt: ">", TEq: "=", TSub: "-"}[type(e)]
            return BinOp(op, self.expr(e.left, rho), self.expr(e.right, rho))
        if isinstance(e, TNonEmpty):
            inner = e.inner
            new = [p for p in inner.trie.dfs() if p not in e.outer]
            rho2 = {p: a for p, a in rho.items() if p in e.outer}
            rho2.update(fresh(new, self.counter))
            roots = [p for p in new if p[:-1] not in new]
            local = roots[0] if roots else None
            return Exists(self.scope(inner, rho2, local, new, nested=True))
        raise TypeError(e)


def triplet_of(q: Query, schema: Schema) -> Triplet:
    return run(q.optic, EMPTY, schema)


def gen_sql(q: Query, schema: Schema, pk: Optional[Mapping[str, str]] = None) -> Select:
    """Translate a checked getAll query; raises a SqlGenError subclass or MissingPk."""
    check_preconditions(q, schema)
    pk = schema.pk if pk is None else pk
    t = triplet_of(q, schema)
    top = t.trie.top
    if top is None:
        raise NoRootFold("the query does not start from a single collection of the root")
    if top.kind is not OpticKind.FOLD:
        raise NoRootFold(f"the query starts with {top.name}, which is a {top.kind}, not a fold")
    g = _Gen(schema, pk)
    paths = t.trie.dfs()
    rho = fresh(paths, g.counter)
    return g.scope(t, rho, (top,), paths, nested=False)
