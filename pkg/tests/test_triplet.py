import itertools
import random

import pytest

from optica import check, parse_optic
from optica.ast import Filtered, Like, Seq
from optica.backend_sql import EMPTY, ROOT, Trie, Triplet, TripletError, fresh, run, to_triplet
from optica.backend_sql.triplet import TGt, TNotNull, TPathSel, TProj, TSub, show
from optica.model import B, Base, Entity
from randgen import OpticGen, shop_schema


def path(schema, *steps):
    out, whole = [], schema.root
    for name in steps:
        p = schema.prim(whole, name)
        out.append(p)
        whole = p.part.name if isinstance(p.part, Entity) else None
    return tuple(out)


def opt(text, schema, whole=None):
    return check(parse_optic(text), schema, whole=whole or schema.root)


def test_entity_step_extends_trie(couples_schema):
    t = to_triplet(opt("couples", couples_schema), couples_schema)(EMPTY)
    c = path(couples_schema, "couples")
    assert t.select == (TPathSel(c),)
    assert list(t.trie) == [c]
    assert t.where == ()


def test_base_step_refines_focus(couples_schema):
    cf = path(couples_schema, "couples", "fst")
    start = Triplet((TPathSel(cf),), Trie().insert(cf))
    t = run(opt("age", couples_schema, "Person"), start, couples_schema)
    assert t.select == (TProj(cf, couples_schema.prim("Person", "age")),)
    assert t.trie == start.trie


def test_differences_triplet(differences, couples_schema):
    t = run(differences.optic, EMPTY, couples_schema)
    c = path(couples_schema, "couples")
    w, m = path(couples_schema, "couples", "fst"), path(couples_schema, "couples", "snd")
    assert list(t.trie) == [c, w, m]
    age = couples_schema.prim("Person", "age")
    name = couples_schema.prim("Person", "name")
    assert t.where == (TGt(TProj(w, age), TProj(m, age)),)
    assert t.select == (TProj(w, name), TSub(TProj(w, age), TProj(m, age)))
    assert "(couples, fst).name" in show(t)


def test_fresh_names_depth_first(differences, couples_schema):
    t = run(differences.optic, EMPTY, couples_schema)
    rho = fresh(t.trie.dfs(), itertools.count())
    c = path(couples_schema, "couples")
    assert rho == {c: "t0", c + (couples_schema.prim("Couple", "fst"),): "t1",
                   c + (couples_schema.prim("Couple", "snd"),): "t2"}
    assert fresh([c], itertools.count()) == {c: "t0"}


def test_merge_keeps_left_order(org_schema):
    d = path(org_schema, "departments")
    e = path(org_schema, "departments", "employees")
    left = Trie().insert(d)
    right = Trie().insert(e)
    merged = left.merge(right)
    assert list(merged) == [d, e]
    assert merged.is_prefix_closed()


def test_nonempty_keeps_outer_trie(expertise, org_schema):
    t = run(expertise.optic, EMPTY, org_schema)
    assert list(t.trie) == [path(org_schema, "departments")]
    assert len(t.where) == 1


def test_affine_base_field_is_restricted():
    s = shop_schema()
    t = run(opt("orders >>> note >>> like 1", s), EMPTY, s)
    assert any(isinstance(w, TNotNull) for w in t.where)


def test_filtered_rejects_restricting_predicates(couples_schema):
    # not reachable from checked terms: a predicate must be a getter
    bogus = Filtered(opt("filtered(like true)", couples_schema))
    with pytest.raises(TripletError):
        run(bogus, EMPTY, couples_schema)


def _singleton(t) -> bool:
    return isinstance(t, (Base, Entity))


def check_invariants(e, schema):
    """Run e from the empty triplet, asserting single selections and prefix closure on every step."""
    problems = []

    def trace(node, t_in, t_out):
        if not t_out.trie.is_prefix_closed():
            problems.append(("prefix", node))
        if _singleton(node.ty.part) and len(t_out.select) != 1:
            problems.append(("single", node))

    run(e, EMPTY, schema, trace)
    return problems


@pytest.mark.parametrize("seed", range(5))
def test_random_terms(seed, couples_schema, org_schema):
    rng = random.Random(seed)
    for schema in (couples_schema, org_schema, shop_schema()):
        gen = OpticGen(schema, rng)
        for _ in range(40):
            raw, _, _ = gen.optic(Entity(schema.root), 6)
            e = check(raw, schema, whole=schema.root)
            assert check_invariants(e, schema) == []


def test_example_queries_invariants(differences, expertise, couples_schema, org_schema):
    assert check_invariants(differences.optic, couples_schema) == []
    assert check_invariants(expertise.optic, org_schema) == []


def test_constant_filter(couples_schema):
    e = check(Seq(None, parse_optic("couples"), Filtered(Like(B(True)))), couples_schema)
    t = run(e, EMPTY, couples_schema)
    assert len(t.where) == 1 and ROOT not in t.trie.paths
