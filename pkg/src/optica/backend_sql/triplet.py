"""Triplets (selection, entity trie, restrictions) and the optic-to-triplet translation.

An optic denotes a triplet endofunction; running it on `EMPTY` yields the
triplet a SELECT statement is generated from.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Tuple, Union

from ..ast import (Eq, Filtered, Fork, Gt, Id, Like, NonEmpty, Not, Optic, Prim, Seq,
                   Sub, ToAf, ToFl)
from ..model import Entity, OpticaError, OpticKind, Schema
from ..model import Prim as SchemaPrim

TPath = Tuple[SchemaPrim, ...]
ROOT: TPath = ()


class TripletError(OpticaError):
    """Internal invariant violated while building a triplet."""


def path_str(p: TPath) -> str:
    return "(" + ", ".join(x.name for x in p) + ")"


@dataclass(frozen=True)
class Trie:
    """Prefix-closed set of entity paths, kept in insertion order."""
    paths: Tuple[TPath, ...] = ()

    def __contains__(self, p: TPath) -> bool:
        return p == ROOT or p in self.paths

    def __iter__(self) -> Iterator[TPath]:
        return iter(self.paths)

    def __len__(self) -> int:
        return len(self.paths)

    def insert(self, p: TPath) -> "Trie":
        new = list(self.paths)
        for i in range(1, len(p) + 1):
            if p[:i] not in new:
                new.append(p[:i])
        return Trie(tuple(new))

    def merge(self, other: "Trie") -> "Trie":
        out = self
        for p in other.paths:
            out = out.insert(p)
        return out

    def is_prefix_closed(self) -> bool:
        return all(p[:i] in self for p in self.paths for i in range(1, len(p)))

    def dfs(self, paths=None) -> List[TPath]:
        """Paths in depth-first order, siblings in insertion order."""
        pool = list(self.paths if paths is None else paths)
        out: List[TPath] = []

        def visit(prefix: TPath):
            for p in pool:
                if len(p) == len(prefix) + 1 and p[:len(prefix)] == prefix:
                    out.append(p)
                    visit(p)
        visit(ROOT)
        # paths whose parent is outside `pool` (used for sub-scopes)
        for p in pool:
            if p not in out:
                out.append(p)
                visit(p)
        return out

    @property
    def top(self) -> Optional[SchemaPrim]:
        """The first step shared by every path, if there is exactly one."""
        firsts = {p[0] for p in self.paths}
        return next(iter(firsts)) if len(firsts) == 1 else None


# -- triplet expressions -----------------------------------------------------

@dataclass(frozen=True)
class TLike:
    value: object  # model base value


@dataclass(frozen=True)
class TNot:
    arg: "TExpr"


@dataclass(frozen=True)
class TGt:
    left: "TExpr"
    right: "TExpr"


@dataclass(frozen=True)
class TEq:
    left: "TExpr"
    right: "TExpr"


@dataclass(frozen=True)
class TSub:
    left: "TExpr"
    right: "TExpr"


@dataclass(frozen=True)
class TPathSel:
    path: TPath


@dataclass(frozen=True)
class TProj:
    path: TPath
    prim: SchemaPrim


@dataclass(frozen=True)
class TNotNull:
    """Restriction: an affine base field is present."""
    arg: "TProj"


@dataclass(frozen=True)
class TNonEmpty:
    inner: "Triplet"
    # trie of the enclosing scope when the snapshot was taken; paths of
    # `inner` outside it are private to the nested query
    outer: Trie = field(default_factory=Trie)


TExpr = Union[TLike, TNot, TGt, TEq, TSub, TPathSel, TProj, TNotNull, TNonEmpty]


@dataclass(frozen=True)
class Triplet:
    select: Tuple[TExpr, ...]
    trie: Trie
    where: Tuple[TExpr, ...] = ()  # a set; duplicates are dropped, order kept

    def restrict(self, extra) -> "Triplet":
        w = list(self.where)
        for e in extra:
            if e not in w:
                w.append(e)
        return Triplet(self.select, self.trie, tuple(w))


EMPTY = Triplet((TPathSel(ROOT),), Trie(), ())


def referenced_paths(e) -> Iterator[TPath]:
    """Paths an expression reads in its own scope (not inside nonEmpty)."""
    if isinstance(e, TPathSel):
        yield e.path
    elif isinstance(e, TProj):
        yield e.path
    elif isinstance(e, (TNot, TNotNull)):
        yield from referenced_paths(e.arg)
    elif isinstance(e, (TGt, TEq, TSub)):
        yield from referenced_paths(e.left)
        yield from referenced_paths(e.right)


# -- translation -------------------------------------------------------------

Tracer = Callable[[Optic, Triplet, Triplet], None]


def _single(t: Triplet, what: str) -> TExpr:
    if len(t.select) != 1:
        raise TripletError(f"{what}: expected a single selection, got {len(t.select)}")
    return t.select[0]


def _focus(t: Triplet, what: str) -> TPath:
    s = _single(t, what)
    if not isinstance(s, TPathSel):
        raise TripletError(f"{what}: focus is not an entity path")
    return s.path


def run(e: Optic, t: Triplet, schema: Schema, trace: Optional[Tracer] = None) -> Triplet:
    out = _run(e, t, schema, trace)
    if trace is not None:
        trace(e, t, out)
    return out


def _run(e: Optic, t: Triplet, schema: Schema, trace) -> Triplet:
    if isinstance(e, (Id, ToAf, ToFl)):
        return t if isinstance(e, Id) else run(e.arg, t, schema, trace)
    if isinstance(e, Prim):
        p = schema.prim(e.ty.whole.name, e.name)
        x = _focus(t, e.name)
        if isinstance(p.part, Entity):
            y = x + (p,)
            return Triplet((TPathSel(y),), t.trie.insert(y), t.where)
        proj = TProj(x, p)
        out = Triplet((proj,), t.trie, t.where)
        # an absent value selects nothing, even if later steps drop the column
        return out.restrict([TNotNull(proj)]) if p.kind is OpticKind.AFFINE else out
    if isinstance(e, Seq):
        return run(e.right, run(e.left, t, schema, trace), schema, trace)
    if isinstance(e, Fork):
        a = run(e.left, t, schema, trace)
        b = run(e.right, t, schema, trace)
        return Triplet(a.select + b.select, a.trie.merge(b.trie), a.where).restrict(b.where)
    if isinstance(e, Like):
        return Triplet((TLike(e.value),), t.trie, t.where)
    if isinstance(e, Not):
        a = run(e.arg, t, schema, trace)
        return Triplet((TNot(_single(a, "not")),), a.trie, a.where)
    if isinstance(e, (Gt, Eq, Sub)):
        node = {Gt: TGt, Eq: TEq, Sub: TSub}[type(e)]
        a = run(e.left, t, schema, trace)
        b = run(e.right, t, schema, trace)
        sel = node(_single(a, "left operand"), _single(b, "right operand"))
        return Triplet((sel,), a.trie.merge(b.trie), a.where).restrict(b.where)
    if isinstance(e, Filtered):
        inner = run(e.pred, Triplet(t.select, t.trie, ()), schema, trace)
        if inner.where:
            raise TripletError("filtered: predicate produced restrictions")
        cond = _single(inner, "filtered")
        return Triplet(t.select, inner.trie, t.where).restrict([cond])
    if isinstance(e, NonEmpty):
        inner = run(e.arg, Triplet(t.select, t.trie, ()), schema, trace)
        return Triplet((TNonEmpty(inner, t.trie),), t.trie, t.where)
    raise TripletError(f"not an optic expression: {e!r}")


def to_triplet(e: Optic, schema: Schema, trace: Optional[Tracer] = None) -> Callable[[Triplet], Triplet]:
    """The triplet endofunction denoted by a checked optic."""
    return lambda t: run(e, t, schema, trace)


# -- debug rendering ---------------------------------------------------------

def show_expr(e) -> str:
    if isinstance(e, TLike):
        return f"like {e.value}"
    if isinstance(e, TNot):
        return f"not {show_expr(e.arg)}"
    if isinstance(e, (TGt, TEq, TSub)):
        op = {TGt: ">", TEq: "==", TSub: "-"}[type(e)]
        return f"({show_expr(e.left)} {op} {show_expr(e.right)})"
    if isinstance(e, TPathSel):
        return path_str(e.path)
    if isinstance(e, TProj):
        return f"{path_str(e.path)}.{e.prim.name}"
    if isinstance(e, TNotNull):
        return f"{show_expr(e.arg)} is present"
    if isinstance(e, TNonEmpty):
        return f"nonEmpty {show(e.inner)}"
    raise TypeError(e)


def show(t: Triplet) -> str:
    s = ", ".join(show_expr(e) for e in t.select)
    f = ", ".join(path_str(p) for p in t.trie)
    w = ", ".join(show_expr(e) for e in t.where)
    return f"(({s}), {{{f}}}, {{{w}}})"
