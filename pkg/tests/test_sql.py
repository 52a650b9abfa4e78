import random
import re
from collections import Counter
from pathlib import Path

import pytest

from optica import bundled, check_query, load_schema, parse_query, shred
from optica.backend_sql import (FoldOverBase, MissingPk, NoRootFold, NotFlatPart, SqlExecError,
                                SqlSyntaxError, alpha_equivalent, exec_sql, gen_sql, parse_sql,
                                print_sql)
from optica.backend_sql.sqlast import Exists, NotE, Select
from optica.eval_std import eval_query
from optica.model import L, flatten
from randgen import random_flat_query, random_value, shop_schema

GOLDEN = Path(__file__).parent / "golden"

ORG_WITH_SKILLS = """\
root Org
entity Department
entity Employee
optic departments : fold Org Department
optic dpt : getter Department String
optic employees : fold Department Employee
optic emp : getter Employee String
optic skills : fold Employee String
pk Department dpt
pk Employee emp
"""


def q(text, schema):
    return check_query(parse_query(text), schema, whole=schema.root)


def golden(name):
    return (GOLDEN / f"{name}.sql").read_text()


def test_differences_golden(differences, couples_schema):
    stmt = gen_sql(differences, couples_schema)
    assert alpha_equivalent(stmt, golden("differences"))
    text = print_sql(stmt)
    assert text.count("INNER JOIN") == 2
    assert text == ("SELECT t1.name, t1.age - t2.age FROM Couple AS t0 "
                    "INNER JOIN Person AS t1 ON t0.fst = t1.name "
                    "INNER JOIN Person AS t2 ON t0.snd = t2.name WHERE t1.age > t2.age;")


def not_exists_depth(s: Select) -> int:
    depth = 0
    for w in s.where:
        if isinstance(w, NotE) and isinstance(w.arg, Exists):
            depth = max(depth, 1 + not_exists_depth(w.arg.query))
    return depth


def test_expertise_golden(expertise, org_schema):
    stmt = gen_sql(expertise, org_schema)
    assert alpha_equivalent(stmt, golden("expertise"))
    assert not_exists_depth(stmt) == 2


def test_alpha_equivalence_is_strict(differences, couples_schema):
    text = print_sql(gen_sql(differences, couples_schema))
    assert not alpha_equivalent(text, text.replace("t1.age > t2.age", "t2.age > t1.age"))
    # renaming aliases consistently is fine, but two aliases may not collapse
    assert alpha_equivalent(text, text.replace("t1", "w").replace("t2", "m"))
    assert not alpha_equivalent(text, text.replace("t2", "t1"))


def test_where_true_and_using(org_schema):
    text = print_sql(gen_sql(q("getAll(departments >>> employees >>> tasks)", org_schema), org_schema))
    assert "USING dpt" in text and "USING emp" in text
    assert text.endswith("WHERE True;")


def test_quote_styles(org_schema):
    stmt = gen_sql(q('getAll(departments >>> filtered(dpt == like "it\'s") >>> dpt)', org_schema),
                   org_schema)
    assert '"it\'s"' in print_sql(stmt)
    assert "'it''s'" in print_sql(stmt, quote="single")
    assert parse_sql(print_sql(stmt, quote="single")) == parse_sql(print_sql(stmt))


def test_printer_round_trip(expertise, differences, org_schema, couples_schema):
    for query, schema in ((expertise, org_schema), (differences, couples_schema)):
        stmt = gen_sql(query, schema)
        assert parse_sql(print_sql(stmt)) == stmt


def test_parse_errors():
    with pytest.raises(SqlSyntaxError):
        parse_sql("SELECT FROM")


def test_nested_parts_are_rejected(couples_schema, org_schema):
    with pytest.raises(NotFlatPart):
        gen_sql(q("getAll(couples)", couples_schema), couples_schema)
    with pytest.raises(NotFlatPart):
        gen_sql(q("getAll(departments >>> employees)", org_schema), org_schema)
    # a pair of flat entities is flat: both rows are selected side by side
    stmt = gen_sql(q("getAll(couples >>> fst *** snd)", couples_schema), couples_schema)
    assert print_sql(stmt).startswith("SELECT t1.*, t2.*")


def test_get_and_preview_are_rejected(couples_schema):
    schema = couples_schema
    for text in ("get(like 1)", "preview(filtered(like true))"):
        with pytest.raises(NoRootFold):
            gen_sql(q(text, schema), schema)


def test_fold_over_base():
    s = load_schema(ORG_WITH_SKILLS)
    with pytest.raises(FoldOverBase):
        gen_sql(q("getAll(departments >>> employees >>> skills)", s), s)
    # a cast getter is still a single column
    gen_sql(q("getAll(departments >>> employees >>> to_fl(to_af(emp)))", s), s)


def test_missing_pk(org_schema):
    bare = load_schema(re.sub(r"^pk .*$", "", bundled("org.schema"), flags=re.M))
    with pytest.raises(MissingPk):
        gen_sql(q("getAll(departments >>> employees >>> emp)", bare), bare)
    # explicit keys override the schema's
    gen_sql(q("getAll(departments >>> employees >>> emp)", bare), bare, pk={"Department": "dpt"})


def test_exec_example_queries(differences, expertise, couples_schema, org_schema, couples_data,
                            org_data):
    rows = exec_sql(gen_sql(differences, couples_schema), shred(couples_data, couples_schema))
    assert rows == [("Alex", 5), ("Cora", 2)]
    rows = exec_sql(gen_sql(expertise, org_schema), shred(org_data, org_schema))
    assert rows == [("Quality",), ("Research",)]


def test_exec_reference_statement_text(couples_schema, couples_data):
    rows = exec_sql(golden("differences"), shred(couples_data, couples_schema))
    assert rows == [("Alex", 5), ("Cora", 2)]


def test_exec_empty_tables(differences, couples_schema):
    assert exec_sql(gen_sql(differences, couples_schema), shred(L(), couples_schema)) == []


def test_exec_errors(couples_schema, couples_data):
    tables = shred(couples_data, couples_schema)
    with pytest.raises(SqlExecError):
        exec_sql("SELECT t0.wife FROM Couple AS t0 WHERE True;", tables)
    with pytest.raises(SqlExecError):
        exec_sql("SELECT t0.fst FROM Nope AS t0 WHERE True;", tables)
    with pytest.raises(SqlExecError):
        exec_sql("SELECT t0.fst FROM Couple AS t0 WHERE t0.fst > 1;", tables)


def test_star_expands_in_field_order(couples_schema, couples_data):
    stmt = gen_sql(q("getAll(couples >>> fst)", couples_schema), couples_schema)
    rows = exec_sql(stmt, shred(couples_data, couples_schema), couples_schema)
    assert rows == [("Alex", 60), ("Cora", 33), ("Eric", 21)]


def test_affine_fields_shop():
    s = shop_schema()
    rng = random.Random(1)
    for text in ["getAll(orders >>> note)", "getAll(orders >>> buyer >>> cname)",
                 "getAll(orders >>> note >>> like 1)",
                 "getAll(orders >>> filtered(nonEmpty(buyer >>> filtered(vip))) >>> ref)"]:
        query = q(text, s)
        for _ in range(20):
            v = random_value(s, rng)
            expected = Counter(flatten(x, s) for x in eval_query(query, v).values)
            assert Counter(exec_sql(gen_sql(query, s), shred(v, s), s)) == expected, text


def agree(query, schema, value) -> bool:
    expected = Counter(flatten(x, schema) for x in eval_query(query, value).values)
    got = Counter(exec_sql(gen_sql(query, schema), shred(value, schema), schema))
    return expected == got


@pytest.mark.parametrize("seed", range(4))
def test_random_queries_agree_with_eval(seed, couples_schema, org_schema):
    rng = random.Random(seed)
    for schema in (couples_schema, org_schema, shop_schema()):
        for _ in range(25):
            query = random_flat_query(schema, rng)
            v = random_value(schema, rng)
            assert agree(query, schema, v), str(query)
