"""Comprehension backend: optic terms as for/if/yield comprehensions."""
from .interp import InterpError, from_value, interpret, run_query, to_plain
from .ir import (App, ComprError, Cond, ConstB, EmptyBag, Exists, FieldProj, For, Lam, PrimOp,
                 RecordLit, TableRef, Term, Var, Yield, free_vars, print_compr, subst)
from .normalize import BudgetExceeded, alpha_equivalent, canonical, normalize
from .translate import build_nested_adapter, compr_optic, compr_query, expertise_handwritten
