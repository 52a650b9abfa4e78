import random
import re
from pathlib import Path

import pytest

from optica import check, check_query, parse_optic, parse_query
from optica.ast import AFFINE, FOLD, GETTER, Id, Seq
from optica.backend_xquery import translate, xq_optic, xq_query, XBin, XFilter, XPath, XDot
from optica.model import Entity
from randgen import OpticGen, shop_schema

GOLDEN = Path(__file__).parent / "golden"


def collapse(text: str) -> str:
    """Whitespace between tags is layout only; other runs count as one space."""
    text = re.sub(r">\s+<", "><", text.strip())
    return re.sub(r"\s+", " ", text)


@pytest.mark.parametrize("name", ["differences", "expertise"])
def test_goldens(name, request):
    q = request.getfixturevalue(name)
    schema = request.getfixturevalue("couples_schema" if name == "differences" else "org_schema")
    expected = (GOLDEN / f"{name}.xq").read_text()
    assert collapse(xq_query(q, schema)) == collapse(expected)


def test_golden_strings_exact(differences, expertise, couples_schema, org_schema):
    assert xq_query(differences, couples_schema) == (
        "/xml/couple[fst/age > snd/age]/<tuple><one>{fst/name}</one>"
        "<two>{fst/age - snd/age}</two></tuple>")
    assert xq_query(expertise, org_schema) == (
        '/xml/department[not(exists(employee[not(exists(task/tsk[. = "abstract"]))]))]/dpt')


def test_relative_optic(couples_schema):
    e = check(parse_optic("couples >>> filtered((fst >>> age) > (snd >>> age))"), couples_schema)
    assert xq_optic(e, couples_schema) == "couple[fst/age > snd/age]"


@pytest.mark.parametrize("kind", [GETTER, AFFINE, FOLD])
def test_identity_is_self(kind, couples_schema):
    assert xq_optic(check(Id(kind), couples_schema, whole="Person"), couples_schema) == "."


def test_root_collection(couples_schema):
    q = check_query(parse_query("getAll(couples)"), couples_schema)
    assert xq_query(q, couples_schema) == "/xml/couple"


def test_literals_and_casts(couples_schema):
    e = check(parse_optic('to_fl(to_af(name == like "O\\"Neil"))'), couples_schema, whole="Person")
    assert xq_optic(e, couples_schema) == 'name = "O""Neil"'
    e = check(parse_optic("like true"), couples_schema)
    assert xq_optic(e, couples_schema) == "true()"


def test_nested_arithmetic_is_bracketed(couples_schema):
    e = check(parse_optic("age - (age - like 1) > like 0"), couples_schema, whole="Person")
    assert xq_optic(e, couples_schema) == "(age - (age - 1)) > 0"


def test_schema_element_names():
    from optica import load_schema
    s = load_schema("root R\nentity X\noptic people : fold R X xml person\noptic n : getter X Int\n")
    q = check_query(parse_query("getAll(people >>> n)"), s)
    assert xq_query(q, s) == "/xml/person/n"


def _plain(x) -> bool:
    # operators get brackets once they become a path step
    return not isinstance(x, XBin)


@pytest.mark.parametrize("seed", range(3))
def test_compositional(seed, couples_schema, org_schema):
    rng = random.Random(seed)
    checked = 0
    for schema in (couples_schema, org_schema, shop_schema()):
        gen = OpticGen(schema, rng)
        for _ in range(80):
            whole = rng.choice([e for e in schema.entities if e != schema.root])
            a, pa, _ = gen.optic(Entity(whole), 4)
            b, _, _ = gen.optic(pa, 4)
            e = check(Seq(None, a, b), schema, whole=whole)
            ta, tb = translate(e.left, schema), translate(e.right, schema)
            if not (_plain(ta) and _plain(tb)):
                continue
            sa, sb = xq_optic(e.left, schema), xq_optic(e.right, schema)
            first = tb.steps[0] if isinstance(tb, XPath) else tb
            if isinstance(first, XFilter) and isinstance(first.base, XDot):
                # `a/.[p]` is written `a[p]`
                expected = sa + sb[1:]
            else:
                expected = sa + "/" + sb
            assert xq_optic(e, schema) == expected
            checked += 1
    assert checked > 50


@pytest.mark.parametrize("seed", range(3))
def test_total(seed, couples_schema, org_schema):
    rng = random.Random(100 + seed)
    for schema in (couples_schema, org_schema, shop_schema()):
        gen = OpticGen(schema, rng)
        for _ in range(100):
            whole = rng.choice([e for e in schema.entities if e != schema.root])
            raw, _, _ = gen.optic(Entity(whole), 6)
            text = xq_optic(check(raw, schema, whole=whole), schema)
            assert text and text.count("(") == text.count(")") and text.count("[") == text.count("]")
