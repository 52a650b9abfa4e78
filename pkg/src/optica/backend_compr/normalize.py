"""Rewriting comprehension terms to normal form, and comparing normal forms."""
from __future__ import annotations

from typing import Dict, Optional

from .ir import (App, ComprError, Cond, ConstB, EmptyBag, Exists, FALSE, FieldProj, For, Fresh,
                 Lam, PrimOp, RecordLit, TableRef, Term, UNIT, Var, Yield, binders, conj,
                 conjuncts, free_vars, print_compr, subst)

DEFAULT_BUDGET = 100_000


class BudgetExceeded(ComprError):
    pass


class _Norm:
    def __init__(self, budget: int, fresh: Fresh, check_scope: bool):
        self.budget = budget
        self.steps = 0
        self.fresh = fresh
        self.check_scope = check_scope
        self.closed: Optional[frozenset] = None

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.budget:
            raise BudgetExceeded(f"normalization exceeded {self.budget} rewrite steps")

    def subst(self, t: Term, name: str, value: Term) -> Term:
        return subst(t, name, value, self.fresh)

    def norm(self, t: Term) -> Term:
        """Children first, then rewrite at the root until nothing fires."""
        if isinstance(t, (Var, ConstB, TableRef, EmptyBag)):
            return t
        if isinstance(t, Lam):
            return Lam(t.param, self.norm(t.body))
        if isinstance(t, App):
            t = App(self.norm(t.fun), self.norm(t.arg))
        elif isinstance(t, RecordLit):
            t = RecordLit(tuple((k, self.norm(v)) for k, v in t.fields))
        elif isinstance(t, FieldProj):
            t = FieldProj(self.norm(t.expr), t.field)
        elif isinstance(t, PrimOp):
            t = PrimOp(t.op, tuple(self.norm(a) for a in t.args))
        elif isinstance(t, For):
            t = For(t.binder, self.norm(t.source), self.norm(t.body))
        elif isinstance(t, Cond):
            t = Cond(self.norm(t.test), self.norm(t.body))
        elif isinstance(t, Yield):
            t = Yield(self.norm(t.expr))
        elif isinstance(t, Exists):
            t = Exists(self.norm(t.expr))
        else:
            raise TypeError(t)
        out = self.rewrite(t)
        if out is None:
            return t
        self.tick()
        if self.check_scope and not free_vars(out) <= free_vars(t):
            raise ComprError(f"rewrite introduced unbound variables: {print_compr(out)}")
        return self.norm(out)

    def rewrite(self, t: Term) -> Optional[Term]:
        """One rule at the root of `t` (whose children are normal), or None."""
        if isinstance(t, App) and isinstance(t.fun, Lam):
            return self.subst(t.fun.body, t.fun.param, t.arg)
        if isinstance(t, FieldProj) and isinstance(t.expr, RecordLit):
            return t.expr.get(t.field)
        if isinstance(t, For):
            src = t.source
            if isinstance(src, Yield):
                return self.subst(t.body, t.binder, src.expr)
            if isinstance(src, EmptyBag) or isinstance(t.body, EmptyBag):
                return EmptyBag()
            if isinstance(src, For):
                inner, body = src.binder, src.body
                if inner in free_vars(t.body) or inner == t.binder:
                    new = self.fresh(inner)
                    body = self.subst(body, inner, Var(new))
                    inner = new
                outer, rest = t.binder, t.body
                if outer in free_vars(body):
                    new = self.fresh(outer)
                    rest = self.subst(rest, outer, Var(new))
                    outer = new
                return For(inner, src.source, For(outer, body, rest))
            if isinstance(src, Cond):
                return Cond(src.test, For(t.binder, src.body, t.body))
            return None
        if isinstance(t, Cond):
            if t.test == ConstB(True):
                return t.body
            if t.test == ConstB(False) or isinstance(t.body, EmptyBag):
                return EmptyBag()
            if isinstance(t.body, Cond):
                return Cond(conj(t.test, t.body.test), t.body.body)
            return None
        if isinstance(t, Exists):
            if isinstance(t.expr, EmptyBag):
                return FALSE
            erased = _erase_yields(t.expr)
            return Exists(erased) if erased != t.expr else None
        if isinstance(t, PrimOp):
            if t.op == "not":
                (a,) = t.args
                if isinstance(a, PrimOp) and a.op == "not":
                    return a.args[0]
                if isinstance(a, ConstB) and isinstance(a.value, bool):
                    return ConstB(not a.value)
                return None
            if t.op == "and":
                flat = conj(*[a for a in t.args if a != ConstB(True)])
                if FALSE in t.args:
                    return FALSE
                return flat if flat != t else None
        return None


def _erase_yields(t: Term) -> Term:
    """Only emptiness matters under exists: every produced element becomes `{}`."""
    if isinstance(t, Yield):
        return Yield(UNIT)
    if isinstance(t, For):
        return For(t.binder, t.source, _erase_yields(t.body))
    if isinstance(t, Cond):
        return Cond(t.test, _erase_yields(t.body))
    return t


def normalize(t: Term, budget: int = DEFAULT_BUDGET, check_scope: bool = False) -> Term:
    """Normal form of a closed term.

    Raises BudgetExceeded instead of returning a partially rewritten term.
    With `check_scope` every rewrite is checked not to introduce free variables.
    """
    fresh = Fresh(set(binders(t)) | free_vars(t))
    return _Norm(budget, fresh, check_scope).norm(t)


# -- comparison --------------------------------------------------------------

def canonical(t: Term, depth: int = 0, names: Optional[Dict[str, str]] = None) -> Term:
    """Binders renamed after their nesting depth; conjuncts sorted.

    Depth-based names do not depend on traversal order, so sorting the
    conjuncts afterwards cannot disturb the renaming.
    """
    names = names or {}
    if isinstance(t, Var):
        return Var(names.get(t.name, "free:" + t.name))
    if isinstance(t, (ConstB, TableRef, EmptyBag)):
        return t
    if isinstance(t, Lam):
        v = f"v{depth}"
        return Lam(v, canonical(t.body, depth + 1, {**names, t.param: v}))
    if isinstance(t, For):
        v = f"v{depth}"
        return For(v, canonical(t.source, depth, names),
                   canonical(t.body, depth + 1, {**names, t.binder: v}))
    c = lambda x: canonical(x, depth, names)  # noqa: E731
    if isinstance(t, App):
        return App(c(t.fun), c(t.arg))
    if isinstance(t, RecordLit):
        return RecordLit(tuple((k, c(v)) for k, v in t.fields))
    if isinstance(t, FieldProj):
        return FieldProj(c(t.expr), t.field)
    if isinstance(t, PrimOp):
        if t.op == "and":
            args = sorted((c(a) for a in conjuncts(t)), key=print_compr)
            return PrimOp("and", tuple(args))
        return PrimOp(t.op, tuple(c(a) for a in t.args))
    if isinstance(t, Cond):
        return Cond(c(t.test), c(t.body))
    if isinstance(t, Yield):
        return Yield(c(t.expr))
    if isinstance(t, Exists):
        return Exists(c(t.expr))
    raise TypeError(t)


def alpha_equivalent(a: Term, b: Term) -> bool:
    """Equal up to bound-variable names and the order of conjuncts in guards."""
    return canonical(a) == canonical(b)
