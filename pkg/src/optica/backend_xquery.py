"""XQuery generation: every optic becomes a (relative) path expression."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union

from .ast import (Eq, Filtered, Fork, Gt, Id, Like, NonEmpty, Not, Optic, Prim, Query,
                  Seq, Sub, ToAf, ToFl)
from .model import B, S, Schema


# small XQuery tree; rendering decides where brackets are needed
@dataclass(frozen=True)
class XDot:
    pass


@dataclass(frozen=True)
class XName:
    name: str


@dataclass(frozen=True)
class XPath:
    steps: Tuple["XQ", ...]


@dataclass(frozen=True)
class XFilter:
    base: "XQ"
    pred: "XQ"


@dataclass(frozen=True)
class XLit:
    text: str


@dataclass(frozen=True)
class XCall:
    fn: str
    arg: "XQ"


@dataclass(frozen=True)
class XBin:
    op: str
    left: "XQ"
    right: "XQ"


@dataclass(frozen=True)
class XTuple:
    left: "XQ"
    right: "XQ"


XQ = Union[XDot, XName, XPath, XFilter, XLit, XCall, XBin, XTuple]


def _steps(x) -> Tuple:
    return x.steps if isinstance(x, XPath) else (x,)


def compose(a, b):
    """Path composition `a/b`; a leading `.[p]` on the right merges into `a[p]`."""
    left = _steps(a)
    right = _steps(b)
    if isinstance(right[0], XFilter) and isinstance(right[0].base, XDot):
        last = left[-1]
        base = XPath(left) if len(left) > 1 else last
        merged = XFilter(base, right[0].pred)
        rest = right[1:]
        return XPath((merged,) + rest) if rest else merged
    return XPath(left + right)


def _is_boolean(x) -> bool:
    return (isinstance(x, XBin) and x.op in (">", "=")) or \
        (isinstance(x, XCall) and x.fn in ("not", "exists")) or \
        (isinstance(x, XLit) and x.text in ("true()", "false()"))


def literal(v) -> str:
    if isinstance(v, S):
        return '"' + v.value.replace('"', '""') + '"'
    if isinstance(v, B):
        return "true()" if v.value else "false()"
    return str(v.value)


def translate(e: Optic, schema: Schema):
    if isinstance(e, Id):
        return XDot()
    if isinstance(e, Prim):
        p = schema.prim(e.ty.whole.name, e.name)
        return XName(p.element)
    if isinstance(e, Seq):
        return compose(translate(e.left, schema), translate(e.right, schema))
    if isinstance(e, Fork):
        return XTuple(translate(e.left, schema), translate(e.right, schema))
    if isinstance(e, Like):
        return XLit(literal(e.value))
    if isinstance(e, Not):
        inner = translate(e.arg, schema)
        # not(not(b)) is b whenever b already denotes a boolean
        if isinstance(inner, XCall) and inner.fn == "not" and _is_boolean(inner.arg):
            return inner.arg
        return XCall("not", inner)
    if isinstance(e, (Gt, Eq, Sub)):
        op = {Gt: ">", Eq: "=", Sub: "-"}[type(e)]
        return XBin(op, translate(e.left, schema), translate(e.right, schema))
    if isinstance(e, Filtered):
        return XFilter(XDot(), translate(e.pred, schema))
    if isinstance(e, NonEmpty):
        return XCall("exists", translate(e.arg, schema))
    if isinstance(e, (ToAf, ToFl)):
        return translate(e.arg, schema)
    raise TypeError(f"not an optic expression: {e!r}")


def render(x, nested: bool = False) -> str:
    """`nested` is set when `x` sits inside an operator or a path step."""
    if isinstance(x, XDot):
        return "."
    if isinstance(x, XName):
        return x.name
    if isinstance(x, XLit):
        return x.text
    if isinstance(x, XPath):
        return "/".join(render(s, nested=True) for s in x.steps)
    if isinstance(x, XFilter):
        return f"{render(x.base, nested=True)}[{render(x.pred)}]"
    if isinstance(x, XCall):
        return f"{x.fn}({render(x.arg)})"
    if isinstance(x, XBin):
        text = f"{render(x.left, nested=True)} {x.op} {render(x.right, nested=True)}"
        return f"({text})" if nested else text
    if isinstance(x, XTuple):
        return f"<tuple><one>{{{render(x.left)}}}</one><two>{{{render(x.right)}}}</two></tuple>"
    raise TypeError(x)


def xq_optic(e: Optic, schema: Schema) -> str:
    return render(translate(e, schema))


def xq_query(q: Query, schema: Schema) -> str:
    return render(compose(XName("/xml"), translate(q.optic, schema)))
