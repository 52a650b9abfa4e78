import random

import pytest
from hypothesis import given, strategies as st

from optica import bundled, check, parse_optic, parse_query, print_optic, print_query
from optica.ast import (AFFINE, Fork, GetAll, Id, Like, Not, Prim, Seq, Sub, erase_casts)
from optica.model import Entity, I, S
from optica.parser import ParseError, render_diagnostic, tokenize
from randgen import OpticGen, shop_schema


def test_seq_is_right_associative():
    assert parse_optic("a >>> b >>> c") == Seq(None, Prim("a"), Seq(None, Prim("b"), Prim("c")))


def test_fork_binds_tighter_than_seq():
    assert parse_optic("a *** b >>> c") == Seq(None, Fork(Prim("a"), Prim("b")), Prim("c"))


def test_subtraction_is_left_associative():
    assert parse_optic("x - y - z") == Sub(Sub(Prim("x"), Prim("y")), Prim("z"))


def test_postfix_not_and_literals():
    assert parse_optic("(a).not") == Not(Prim("a"))
    assert parse_optic("like -3") == Like(I(-3))
    assert parse_optic(r'like "say \"hi\""') == Like(S('say "hi"'))
    assert parse_optic("id_af") == Id(AFFINE)


def test_keywords_only_before_parenthesis():
    assert parse_optic("nonEmpty") == Prim("nonEmpty")
    assert parse_optic("filtered(like true)") != Prim("filtered")


def test_example_queries_parse():
    q = parse_query(bundled("differences.query"))
    assert isinstance(q, GetAll)
    q2 = parse_query(bundled("expertise.query"))
    assert "filtered" in print_query(q2)


@pytest.mark.parametrize("text, msg", [
    ("a > b == c", "do not chain"),
    ("getAll(x", "expected|trailing"),
    ("a >>> >>> b", "expected an optic"),
    ("a $ b", "unexpected character"),
    ('like "open', "unterminated"),
    ("", "expected"),
    ("like", "literal|expected"),
])
def test_parse_errors(text, msg):
    with pytest.raises(ParseError, match=msg):
        parse_optic(text)


def test_query_requires_wrapper():
    with pytest.raises(ParseError, match="getAll"):
        parse_query("couples")


def test_error_span_and_diagnostic():
    text = "couples >>> $"
    with pytest.raises(ParseError) as info:
        parse_optic(text)
    assert info.value.span.start == text.index("$")
    out = render_diagnostic(text, info.value.span, info.value.message)
    assert out.splitlines()[-1].endswith("^")
    assert "query:1:13" in out


def test_tokenize_positions():
    toks = tokenize("a >>> b")
    assert [(t.kind, t.start) for t in toks] == [("ident", 0), ("op", 2), ("ident", 6), ("eof", 7)]


def test_print_example_query(differences):
    # casts inserted by the checker are printed explicitly
    text = print_query(differences)
    assert text.startswith("getAll(couples >>> ")
    assert parse_query(text)


@pytest.mark.parametrize("seed", range(4))
def test_round_trip_random_trees(seed, couples_schema, org_schema):
    rng = random.Random(seed)
    for schema in (couples_schema, org_schema, shop_schema()):
        gen = OpticGen(schema, rng)
        for _ in range(50):
            whole = rng.choice([e for e in schema.entities if e != schema.root])
            raw, _, _ = gen.optic(Entity(whole), 6)
            e = check(raw, schema, whole=whole)
            text = print_optic(e)
            back = parse_optic(text)
            assert erase_casts(back) == erase_casts(e), text
            # printing the checked tree keeps its casts, so re-checking is exact
            assert check(back, schema, whole=whole) == e, text
            assert print_optic(raw) and erase_casts(parse_optic(print_optic(raw))) == erase_casts(raw)


@given(st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=20))
def test_string_literals_round_trip(s):
    e = Like(S(s))
    assert parse_optic(print_optic(e)) == e


@given(st.integers(-10**6, 10**6))
def test_int_literals_round_trip(n):
    assert parse_optic(print_optic(Like(I(n)))) == Like(I(n))
