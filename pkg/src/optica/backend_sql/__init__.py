"""Relational backend: triplets, SELECT generation and a small executor."""
from .execute import SqlExecError, exec_sql
from .gen import (FoldOverBase, NoRootFold, NotFlatPart, SqlGenError, check_preconditions,
                  fresh, gen_sql, triplet_of)
from .sqlast import SqlSyntaxError, alpha_equivalent, canonical, parse_sql, print_sql
from .triplet import EMPTY, ROOT, Trie, Triplet, TripletError, run, to_triplet
from ..model import MissingPk

__all__ = [
    "EMPTY", "ROOT", "Trie", "Triplet", "TripletError", "run", "to_triplet",
    "gen_sql", "fresh", "triplet_of", "check_preconditions",
    "SqlGenError", "NotFlatPart", "FoldOverBase", "NoRootFold", "MissingPk",
    "print_sql", "parse_sql", "alpha_equivalent", "canonical", "SqlSyntaxError",
    "exec_sql", "SqlExecError",
]
