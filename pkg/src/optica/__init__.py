"""Optica: read-only optic queries compiled to in-memory evaluation, XQuery, SQL and comprehensions."""
from importlib import resources

from .model import (Schema, OpticaError, load_schema, load_value, print_xml, shred)
from .parser import parse_optic, parse_query, print_optic, print_query
from .ast import check, check_query, typecheck, typecheck_query

__version__ = "0.1.0"


def bundled(name: str) -> str:
    """Text of a bundled example file (couples/org schemas, data and queries)."""
    return resources.files(__package__).joinpath("data", name).read_text(encoding="utf-8")
