"""Command-line front end.

    optica check       --schema S QUERY [--dump]
    optica eval        --schema S --data D QUERY
    optica emit-xquery --schema S QUERY
    optica emit-sql    --schema S QUERY [--pk E=col ...] [--quote single]
    optica emit-compr  --schema S QUERY [--adapt] [--normalize]
    optica exec-sql    --schema S --data D QUERY [--pk E=col ...]

QUERY may be `-` to read it from stdin.  Exit status: 0 success, 1 parse or
type error, 2 a backend cannot translate the query, 3 unreadable input files.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from . import bundled
from .ast import OpticTypeError, check_query, dump
from .backend_compr import (App, ComprError, build_nested_adapter, compr_query, normalize,
                            print_compr)
from .backend_sql import SqlGenError, exec_sql, gen_sql, print_sql
from .backend_xquery import xq_query
from .eval_std import EvalError, eval_query
from .model import (DataError, MissingPk, SchemaError, ShredError, load_schema, load_value,
                    shred)
from .parser import ParseError, parse_query, render_diagnostic

EXIT_OK, EXIT_QUERY, EXIT_BACKEND, EXIT_IO = 0, 1, 2, 3


class InputError(Exception):
    pass


def _read(path: str, kind: str) -> str:
    p = Path(path)
    if not p.exists():
        # bare names refer to the bundled examples: --schema couples
        try:
            return bundled(f"{path}.{kind}")
        except (FileNotFoundError, OSError):
            pass
    try:
        return p.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _read_data(path: str) -> str:
    p = Path(path)
    if not p.exists():
        for ext in ("xml", "json"):
            try:
                return bundled(f"{path}.{ext}")
            except (FileNotFoundError, OSError):
                pass
    return _read(path, "xml")


def _pk_overrides(items: List[str]) -> dict:
    out = {}
    for item in items or []:
        entity, sep, col = item.partition("=")
        if not sep or not entity or not col:
            raise InputError(f"--pk expects Entity=column, got {item!r}")
        out[entity] = col
    return out


def _row_text(row: tuple) -> str:
    cells = ["null" if c is None else ("true" if c is True else "false" if c is False else str(c))
             for c in row]
    return cells[0] if len(cells) == 1 else "(" + ",".join(cells) + ")"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="optica", description="Typed optic queries and their backends.")
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, help, data=False):
        p = sub.add_parser(name, help=help)
        p.add_argument("--schema", required=True, help="schema file (or a bundled name: couples, org)")
        if data:
            p.add_argument("--data", required=True, help="XML or JSON document for the schema's root")
        p.add_argument("query", help="query text, or - for stdin")
        return p

    p = cmd("check", "type check a query and print its type")
    p.add_argument("--dump", action="store_true", help="also print the annotated tree")
    cmd("eval", "run a query over in-memory data", data=True)
    cmd("emit-xquery", "print the XQuery translation")
    for name, data in (("emit-sql", False), ("exec-sql", True)):
        p = cmd(name, "print the SQL translation" if not data
                else "run the SQL translation over the shredded data", data=data)
        p.add_argument("--pk", action="append", default=[], metavar="Entity=col",
                       help="primary key column for an entity (repeatable)")
        p.add_argument("--quote", choices=("double", "single"), default="double",
                       help="string literal quoting style")
    p = cmd("emit-compr", "print the comprehension translation")
    p.add_argument("--adapt", action="store_true", help="apply the term to the flat-to-nested adapter")
    p.add_argument("--normalize", action="store_true", help="normalize the term")
    p.add_argument("--pk", action="append", default=[], metavar="Entity=col")
    return ap


def run(argv: Optional[List[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    text = ""

    def out(s: str) -> None:
        print(s, file=stdout)

    try:
        text = sys.stdin.read() if args.query == "-" else args.query
        schema = load_schema(_read(args.schema, "schema"))
        if getattr(args, "pk", None):
            schema = schema.with_pk(_pk_overrides(args.pk))
        value = load_value(_read_data(args.data), schema) if getattr(args, "data", None) else None
        q = check_query(parse_query(text.strip()), schema, whole=schema.root)

        if args.command == "check":
            out(str(q.ty))
            if args.dump:
                out(dump(q))
        elif args.command == "eval":
            out(str(eval_query(q, value)))
        elif args.command == "emit-xquery":
            out(xq_query(q, schema))
        elif args.command == "emit-sql":
            out(print_sql(gen_sql(q, schema), quote=args.quote))
        elif args.command == "exec-sql":
            rows = exec_sql(gen_sql(q, schema), shred(value, schema), schema)
            out("[" + ",".join(_row_text(r) for r in rows) + "]")
        elif args.command == "emit-compr":
            term = compr_query(q, schema)
            if args.adapt:
                term = App(term, build_nested_adapter(schema))
            if args.normalize:
                term = normalize(term)
            out(print_compr(term))
        return EXIT_OK
    except (ParseError, OpticTypeError) as exc:
        print(render_diagnostic(text.strip(), exc.span, exc.message), file=stderr)
        return EXIT_QUERY
    except (SqlGenError, MissingPk, ComprError, ShredError, EvalError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_BACKEND
    except (InputError, SchemaError, DataError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
