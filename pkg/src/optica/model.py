"""Model types, schemas, nested values and the nested-to-relational shredder."""
from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union


class OpticaError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(OpticaError):
    pass


class DataError(OpticaError):
    pass


class ShredError(OpticaError):
    pass


class MissingPk(OpticaError):
    def __init__(self, entity: str):
        super().__init__(f"no primary key declared for entity {entity!r}")
        self.entity = entity


# -- model types -------------------------------------------------------------

@dataclass(frozen=True)
class Base:
    name: str  # "Int" | "Bool" | "String"

    def __str__(self) -> str:
        return self.name


INT = Base("Int")
BOOL = Base("Bool")
STRING = Base("String")
BASE_TYPES = {"Int": INT, "Bool": BOOL, "String": STRING}


@dataclass(frozen=True)
class Pair:
    left: "ModelType"
    right: "ModelType"

    def __str__(self) -> str:
        return f"({self.left}, {self.right})"


@dataclass(frozen=True)
class Entity:
    name: str

    def __str__(self) -> str:
        return self.name


ModelType = Union[Base, Pair, Entity]


def is_base(t) -> bool:
    return isinstance(t, Base)


def is_singleton(t) -> bool:
    """Base or entity type, i.e. anything but a product."""
    return isinstance(t, (Base, Entity))


class OpticKind(IntEnum):
    GETTER = 0
    AFFINE = 1
    FOLD = 2

    def __str__(self) -> str:
        return ("getter", "affine", "fold")[self.value]

    @classmethod
    def parse(cls, text: str) -> "OpticKind":
        try:
            return {"getter": cls.GETTER, "affine": cls.AFFINE, "fold": cls.FOLD}[text]
        except KeyError:
            raise SchemaError(f"unknown optic kind {text!r}") from None


@dataclass(frozen=True)
class OpticType:
    kind: OpticKind
    whole: ModelType
    part: ModelType

    def __str__(self) -> str:
        return f"{self.kind} {_paren(self.whole)} {_paren(self.part)}"


def _paren(t) -> str:
    return str(t)


class Cardinality(IntEnum):
    ONE = 0
    OPTION = 1
    MANY = 2


@dataclass(frozen=True)
class QueryType:
    source: ModelType
    cardinality: Cardinality
    target: ModelType

    def __str__(self) -> str:
        prefix = {Cardinality.ONE: "", Cardinality.OPTION: "option ", Cardinality.MANY: "list "}
        return f"{self.source} -> {prefix[self.cardinality]}{self.target}"


# -- schema ------------------------------------------------------------------

@dataclass(frozen=True)
class Prim:
    name: str
    kind: OpticKind
    whole: str
    part: ModelType
    element: str  # XML element / XQuery step name

    @property
    def type(self) -> OpticType:
        return OpticType(self.kind, Entity(self.whole), self.part)


PkMap = Mapping[str, str]


@dataclass(frozen=True)
class Schema:
    root: str
    entities: Tuple[str, ...]
    prims: Tuple[Prim, ...]
    pk: Mapping[str, str] = field(default_factory=dict)

    @property
    def root_type(self) -> Entity:
        return Entity(self.root)

    def fields(self, entity: str) -> List[Prim]:
        """Primitive optics whose whole is `entity`, in declaration order."""
        return [p for p in self.prims if p.whole == entity]

    def field_order(self, entity: str) -> List[str]:
        return [p.name for p in self.fields(entity)]

    def prim(self, whole: str, name: str) -> Optional[Prim]:
        for p in self.prims:
            if p.whole == whole and p.name == name:
                return p
        return None

    def prims_named(self, name: str) -> List[Prim]:
        return [p for p in self.prims if p.name == name]

    @property
    def root_collection(self) -> Optional[Prim]:
        """The root's only prim when it is a fold; the root value is then a plain list."""
        fs = self.fields(self.root)
        if len(fs) == 1 and fs[0].kind is OpticKind.FOLD:
            return fs[0]
        return None

    def is_flat(self, t) -> bool:
        if isinstance(t, Base):
            return True
        if isinstance(t, Pair):
            return self.is_flat(t.left) and self.is_flat(t.right)
        # no entity-valued and no multivalued fields
        return all(isinstance(p.part, Base) and p.kind is not OpticKind.FOLD
                   for p in self.fields(t.name))

    def with_pk(self, pk: Mapping[str, str]) -> "Schema":
        merged = dict(self.pk)
        merged.update(pk)
        return Schema(self.root, self.entities, self.prims, merged)


def _parse_part(token: str, entities: Sequence[str], lineno: int):
    if token in BASE_TYPES:
        return BASE_TYPES[token]
    if token not in entities:
        raise SchemaError(f"line {lineno}: unknown entity {token!r}")
    return Entity(token)


def load_schema(text: str) -> Schema:
    """Parse the line-oriented schema format.

    ::

        root Couples
        entity Couple
        optic couples : fold Couples Couple [xml couple]
        pk Person name
    """
    root = None
    entities: List[str] = []
    raw_prims = []
    pk: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        head = words[0]
        if head == "root" and len(words) == 2:
            if root is not None:
                raise SchemaError(f"line {lineno}: root declared twice")
            root = words[1]
        elif head == "entity" and len(words) == 2:
            if words[1] in entities:
                raise SchemaError(f"line {lineno}: entity {words[1]!r} declared twice")
            entities.append(words[1])
        elif head == "optic" and len(words) in (6, 8) and words[2] == ":":
            element = None
            if len(words) == 8:
                if words[6] != "xml":
                    raise SchemaError(f"line {lineno}: expected 'xml <element>'")
                element = words[7]
            raw_prims.append((lineno, words[1], words[3], words[4], words[5], element))
        elif head == "pk" and len(words) == 3:
            pk[words[1]] = words[2]
        else:
            raise SchemaError(f"line {lineno}: cannot parse {line!r}")
    if root is None:
        raise SchemaError("missing 'root' declaration")
    if root not in entities:
        entities.insert(0, root)

    prims: List[Prim] = []
    seen = set()
    for lineno, name, kind, whole, part, element in raw_prims:
        if whole not in entities:
            raise SchemaError(f"line {lineno}: unknown entity {whole!r}")
        if (whole, name) in seen:
            raise SchemaError(f"line {lineno}: duplicate optic {name!r} on {whole}")
        seen.add((whole, name))
        k = OpticKind.parse(kind)
        if element is None:
            element = name[:-1] if k is OpticKind.FOLD and name.endswith("s") and len(name) > 1 else name
        prims.append(Prim(name, k, whole, _parse_part(part, entities, lineno), element))
    for entity in pk:
        if entity not in entities:
            raise SchemaError(f"pk declared for unknown entity {entity!r}")

    schema = Schema(root, tuple(entities), tuple(prims), pk)
    _check_connected(schema)
    return schema


def _check_connected(schema: Schema) -> None:
    reached = {schema.root}
    todo = [schema.root]
    while todo:
        cur = todo.pop()
        for p in schema.fields(cur):
            if isinstance(p.part, Entity) and p.part.name not in reached:
                reached.add(p.part.name)
                todo.append(p.part.name)
    missing = [e for e in schema.entities if e not in reached]
    if missing:
        raise SchemaError(f"entities not reachable from root {schema.root}: {', '.join(missing)}")


# -- values ------------------------------------------------------------------

@dataclass(frozen=True)
class I:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class B:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class S:
    value: str

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class P:
    left: "Value"
    right: "Value"

    def __str__(self) -> str:
        return f"({self.left},{self.right})"


@dataclass(frozen=True)
class R:
    entity: str
    fields: Tuple[Tuple[str, "Value"], ...]

    def __getitem__(self, name: str) -> "Value":
        for k, v in self.fields:
            if k == name:
                return v
        raise KeyError(name)

    def __str__(self) -> str:
        inner = ",".join(f"{k}={v}" for k, v in self.fields)
        return f"{self.entity}({inner})"


@dataclass(frozen=True)
class L:
    items: Tuple["Value", ...] = ()

    def __iter__(self) -> Iterator["Value"]:
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __str__(self) -> str:
        return "[" + ",".join(str(v) for v in self.items) + "]"


Value = Union[I, B, S, P, R, L]
BaseValue = Union[I, B, S]


def lst(*items) -> L:
    return L(tuple(items))


def rec(entity: str, **fields) -> R:
    return R(entity, tuple(fields.items()))


def base_value(v) -> BaseValue:
    """Wrap a Python scalar as a base value (bool is checked before int)."""
    if isinstance(v, (I, B, S)):
        return v
    if isinstance(v, bool):
        return B(v)
    if isinstance(v, int):
        return I(v)
    if isinstance(v, str):
        return S(v)
    raise TypeError(f"not a base value: {v!r}")


def type_of_base(v: BaseValue) -> Base:
    return {I: INT, B: BOOL, S: STRING}[type(v)]


def to_python(v):
    """Plain Python rendering: pairs become tuples, records dicts, lists lists."""
    if isinstance(v, (I, B, S)):
        return v.value
    if isinstance(v, P):
        return (to_python(v.left), to_python(v.right))
    if isinstance(v, R):
        return {k: to_python(x) for k, x in v.fields}
    if isinstance(v, L):
        return [to_python(x) for x in v.items]
    raise TypeError(v)


def flatten(v, schema: Optional[Schema] = None) -> Tuple:
    """Flatten a result value into the tuple of base values a SQL row would hold.

    Records contribute their base-typed, single-valued fields in field order;
    an absent affine value flattens to None (a SQL NULL).
    """
    if isinstance(v, (I, B, S)):
        return (v.value,)
    if isinstance(v, P):
        return flatten(v.left, schema) + flatten(v.right, schema)
    if isinstance(v, R):
        out: Tuple = ()
        for k, x in v.fields:
            if isinstance(x, (I, B, S)):
                out += (x.value,)
            elif schema is not None:
                p = schema.prim(v.entity, k)
                if p.kind is OpticKind.AFFINE and isinstance(p.part, Base):
                    out += (x.items[0].value if len(x) else None,)
        return out
    raise TypeError(f"cannot flatten {v!r}")


# -- value checking ----------------------------------------------------------

def check_value(v, t, schema: Schema) -> None:
    """Raise DataError unless `v` conforms to model type `t`."""
    if isinstance(t, Base):
        if type_of_base(v) != t if isinstance(v, (I, B, S)) else True:
            raise DataError(f"expected {t}, got {v}")
        return
    if isinstance(t, Pair):
        if not isinstance(v, P):
            raise DataError(f"expected pair, got {v}")
        check_value(v.left, t.left, schema)
        check_value(v.right, t.right, schema)
        return
    if t.name == schema.root and schema.root_collection is not None:
        prim = schema.root_collection
        if not isinstance(v, L):
            raise DataError(f"expected a list for root {t.name}")
        for item in v:
            check_value(item, prim.part, schema)
        return
    if not isinstance(v, R) or v.entity != t.name:
        raise DataError(f"expected {t.name} record, got {v}")
    names = [k for k, _ in v.fields]
    if names != schema.field_order(t.name):
        raise DataError(f"{t.name} record has fields {names}, expected {schema.field_order(t.name)}")
    for p in schema.fields(t.name):
        x = v[p.name]
        if p.kind is OpticKind.GETTER:
            check_value(x, p.part, schema)
        else:
            if not isinstance(x, L):
                raise DataError(f"{t.name}.{p.name} must be a list")
            if p.kind is OpticKind.AFFINE and len(x) > 1:
                raise DataError(f"{t.name}.{p.name} is affine but holds {len(x)} values")
            for item in x:
                check_value(item, p.part, schema)


# -- XML / JSON ingestion ----------------------------------------------------

def _parse_base(text: Optional[str], t: Base, where: str) -> BaseValue:
    text = (text or "").strip()
    if t == INT:
        try:
            return I(int(text))
        except ValueError:
            raise DataError(f"{where}: expected an integer, got {text!r}") from None
    if t == BOOL:
        if text in ("true", "1"):
            return B(True)
        if text in ("false", "0"):
            return B(False)
        raise DataError(f"{where}: expected a boolean, got {text!r}")
    return S(text)


def _xml_entity(elem: ET.Element, entity: str, schema: Schema, where: str) -> R:
    if elem.attrib:
        raise DataError(f"{where}: attributes are not supported ({', '.join(elem.attrib)})")
    children = list(elem)
    fields = []
    known = set()
    for p in schema.fields(entity):
        known.add(p.element)
        matches = [c for c in children if c.tag == p.element]
        here = f"{where}/{p.element}"
        if p.kind is OpticKind.GETTER:
            if len(matches) != 1:
                what = "missing" if not matches else "repeated"
                raise DataError(f"{here}: {what} mandatory element")
            fields.append((p.name, _xml_part(matches[0], p.part, schema, here)))
        else:
            if p.kind is OpticKind.AFFINE and len(matches) > 1:
                raise DataError(f"{here}: at most one element allowed")
            fields.append((p.name, L(tuple(_xml_part(m, p.part, schema, here) for m in matches))))
    for c in children:
        if c.tag not in known:
            raise DataError(f"{where}: unexpected element <{c.tag}>")
    return R(entity, tuple(fields))


def _xml_part(elem: ET.Element, t, schema: Schema, where: str):
    if isinstance(t, Base):
        if elem.attrib:
            raise DataError(f"{where}: attributes are not supported")
        if len(elem):
            raise DataError(f"{where}: expected a simple value")
        return _parse_base(elem.text, t, where)
    if isinstance(t, Entity):
        return _xml_entity(elem, t.name, schema, where)
    raise DataError(f"{where}: pair-typed fields cannot be stored")


def load_value(text: str, schema: Schema) -> Value:
    """Load an XML (``<xml>`` rooted) or JSON document as a value of the root type."""
    stripped = text.lstrip()
    if stripped.startswith("<"):
        try:
            root = ET.fromstring(text)
        except ET.ParseError as exc:
            raise DataError(f"malformed XML: {exc}") from None
        if root.tag != "xml":
            raise DataError(f"document root must be <xml>, got <{root.tag}>")
        rv = _xml_entity(root, schema.root, schema, "/xml")
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"malformed JSON: {exc}") from None
        coll = schema.root_collection
        if coll is not None and isinstance(doc, list):
            doc = {coll.name: doc}
        rv = _json_entity(doc, schema.root, schema, "$")
    coll = schema.root_collection
    if coll is not None:
        return rv[coll.name]
    return rv


def _json_entity(doc, entity: str, schema: Schema, where: str) -> R:
    if not isinstance(doc, dict):
        raise DataError(f"{where}: expected an object for {entity}")
    fields = []
    for p in schema.fields(entity):
        here = f"{where}.{p.name}"
        x = doc.get(p.name)
        if p.kind is OpticKind.GETTER:
            if x is None:
                raise DataError(f"{here}: missing mandatory field")
            fields.append((p.name, _json_part(x, p.part, schema, here)))
        else:
            if x is None:
                items = []
            elif isinstance(x, list):
                items = x
            elif p.kind is OpticKind.AFFINE:
                items = [x]
            else:
                raise DataError(f"{here}: expected an array")
            if p.kind is OpticKind.AFFINE and len(items) > 1:
                raise DataError(f"{here}: at most one value allowed")
            fields.append((p.name, L(tuple(_json_part(i, p.part, schema, here) for i in items))))
    extra = set(doc) - set(schema.field_order(entity))
    if extra:
        raise DataError(f"{where}: unexpected fields {sorted(extra)}")
    return R(entity, tuple(fields))


def _json_part(x, t, schema: Schema, where: str):
    if isinstance(t, Base):
        if t == INT and isinstance(x, int) and not isinstance(x, bool):
            return I(x)
        if t == INT and isinstance(x, str):
            return _parse_base(x, t, where)
        if t == BOOL and isinstance(x, bool):
            return B(x)
        if t == STRING and isinstance(x, str):
            return S(x)
        raise DataError(f"{where}: expected {t}, got {x!r}")
    if isinstance(t, Entity):
        return _json_entity(x, t.name, schema, where)
    raise DataError(f"{where}: pair-typed fields cannot be stored")


def print_xml(v: Value, schema: Schema, indent: Optional[str] = "    ") -> str:
    """Render a root value following the element-per-optic convention."""
    root = ET.Element("xml")
    coll = schema.root_collection
    if coll is not None:
        v = R(schema.root, ((coll.name, v),))
    _xml_fill(root, v, schema)
    if indent:
        ET.indent(root, space=indent)
    return ET.tostring(root, encoding="unicode")


def _xml_fill(elem: ET.Element, v: R, schema: Schema) -> None:
    for p in schema.fields(v.entity):
        x = v[p.name]
        items = [x] if p.kind is OpticKind.GETTER else list(x)
        for item in items:
            child = ET.SubElement(elem, p.element)
            if isinstance(item, R):
                _xml_fill(child, item, schema)
            else:
                child.text = str(item)


# -- shredding ---------------------------------------------------------------

@dataclass(frozen=True)
class RelTable:
    name: str
    columns: Tuple[str, ...]
    rows: Tuple[Tuple, ...]

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ShredError(f"{self.name}: row {row} does not match columns {self.columns}")


def _pk(pk: PkMap, entity: str) -> str:
    try:
        return pk[entity]
    except KeyError:
        raise MissingPk(entity) from None


def fold_parents(schema: Schema, entity: str) -> List[Prim]:
    """Fold edges (outside the root) whose part is `entity`."""
    return [p for p in schema.prims
            if p.kind is OpticKind.FOLD and p.part == Entity(entity) and p.whole != schema.root]


def table_columns(schema: Schema, entity: str, pk: PkMap) -> List[str]:
    """Own columns in field order, then one association column per fold parent."""
    cols = [p.name for p in schema.fields(entity) if p.kind is not OpticKind.FOLD]
    for edge in fold_parents(schema, entity):
        col = _pk(pk, edge.whole)
        if col in cols:
            raise ShredError(f"{entity}: association column {col!r} clashes with a field")
        cols.append(col)
    return cols


def shred(v: Value, schema: Schema, pk: Optional[PkMap] = None) -> Dict[str, RelTable]:
    """Flatten a nested root value into one table per (non-root) entity.

    Entity-valued getters become foreign-key columns holding the target's
    primary key; fold children carry their parent's key in a column named
    after it.
    """
    pk = schema.pk if pk is None else pk
    entities = [e for e in schema.entities if e != schema.root]
    columns = {e: table_columns(schema, e, pk) for e in entities}
    rows: Dict[str, List[Tuple]] = {e: [] for e in entities}
    keyed: Dict[str, Dict] = {e: {} for e in entities}

    def key_of(rv: R):
        return rv[_pk(pk, rv.entity)].value

    def emit(rv: R, parent: Optional[R], via: Prim) -> None:
        row = []
        for p in schema.fields(rv.entity):
            x = rv[p.name]
            if p.kind is OpticKind.FOLD:
                for item in x:
                    if isinstance(item, R):
                        emit(item, rv, p)
                    else:
                        raise ShredError(f"{rv.entity}.{p.name}: folds over base values have no table")
                continue
            if p.kind is OpticKind.AFFINE:
                x = x.items[0] if len(x) else None
            if isinstance(x, R):
                emit(x, rv, p)
                row.append(key_of(x))
            else:
                row.append(None if x is None else x.value)
        if via.kind is OpticKind.FOLD and via.whole != schema.root:
            row.append(key_of(parent))
        row = tuple(row)
        if rv.entity in pk:
            k = key_of(rv)
            seen = keyed[rv.entity]
            if k in seen:
                if via.kind is OpticKind.FOLD or seen[k] != row:
                    raise ShredError(f"{rv.entity}: primary key collision on {k!r}")
                return
            seen[k] = row
        rows[rv.entity].append(row)

    coll = schema.root_collection
    root = R(schema.root, ((coll.name, v),)) if coll is not None else v
    for p in schema.fields(schema.root):
        if p.kind is not OpticKind.FOLD:
            raise ShredError(f"root optic {p.name!r} must be a fold to be shredded")
        for item in root[p.name]:
            emit(item, root, p)
    return {e: RelTable(e, tuple(columns[e]), tuple(rows[e])) for e in entities}
