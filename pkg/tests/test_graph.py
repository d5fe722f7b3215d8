import json

import pytest
from hypothesis import given, settings, strategies as st

from univcode.errors import BudgetExceeded, EvaluationError, UnknownOrbitError
from univcode.graph import (
    FunctionSpec, alpha, classify_component, common_descendant, components_json,
    enumerate_components, orbit, preimage_rank, to_dot, tree_slice,
)

expr = FunctionSpec.from_expr
HALF = "max(1, n / 2)"


def table(mapping, default="identity", **kw):
    return FunctionSpec.from_table(mapping, default, **kw)


def test_orbit_examples():
    r = orbit(expr("n"), 5)
    assert (r.verdict, r.tail_length, r.cycle_length, r.cycle_entry) == ("cyclic", 0, 1, 5)
    r = orbit(expr("n + 1"), 1)
    assert (r.verdict, r.witness_from) == ("acyclic", 0)
    r = orbit(table({1: 2, 2: 3, 3: 1}, "error"), 1)
    assert (r.verdict, r.tail_length, r.cycle_length, r.cycle_entry) == ("cyclic", 0, 3, 1)


def test_orbit_tail_and_entry():
    r = orbit(expr(HALF), 40)  # 40 20 10 5 2 1 1
    assert (r.tail_length, r.cycle_length, r.cycle_entry) == (5, 1, 1)
    r = orbit(table({1: 2, 2: 3, 3: 4, 4: 2}), 1)
    assert (r.tail_length, r.cycle_length, r.cycle_entry) == (1, 3, 2)


def test_orbit_unknown_without_witness():
    # grows overall but not monotonically, so no witness
    spec = expr("if n % 2 == 0 then n + 3 else max(1, n - 1)", eval_budget=200)
    assert orbit(spec, 2).verdict == "unknown"
    hinted = expr("if n % 2 == 0 then n + 3 else max(1, n - 1)", eval_budget=200,
                  acyclicity_hint=True)
    assert orbit(hinted, 2).verdict == "acyclic"


def test_classify_examples():
    c = classify_component(expr(HALF), 13)
    assert c.classification == "cyclic" and c.cycle.members == (1,)
    assert classify_component(expr("n + 2"), 4).classification == "acyclic"
    c = classify_component(table({1: 1, 2: 1, 3: 1}, "error"), 3)
    assert c.cycle.members == (1,) and c.representative == 1


def test_classify_refuses_unknown():
    spec = expr("if n % 2 == 0 then n + 3 else max(1, n - 1)", eval_budget=100)
    with pytest.raises(UnknownOrbitError):
        classify_component(spec, 2)


def test_alpha_examples():
    assert alpha(expr("1"), 1, 3) == 3
    assert alpha(expr("n + 1"), 5, 1) == 4
    assert alpha(expr(HALF), 3, 2) == 7


def test_alpha_matches_brute_force():
    h = lambda n: max(1, n // 2)
    spec = expr(HALF)
    for u in range(1, 40):
        pre = [x for x in range(1, 200) if h(x) == u]
        for i, x in enumerate(pre, start=1):
            assert alpha(spec, u, i) == x


def test_alpha_budget():
    with pytest.raises(BudgetExceeded):
        alpha(expr("n + 1", preimage_scan_bound=50), 5, 2)


def test_preimage_rank():
    spec = expr(HALF)
    assert preimage_rank(spec, 6) == 1 and preimage_rank(spec, 7) == 2
    assert preimage_rank(spec, 3, exclude=2) == 2  # preimages of 1 are 1, 2, 3; skip 2
    assert preimage_rank(spec, 1) == 1


def test_common_descendant_examples():
    assert common_descendant(expr(HALF), 12, 13) == (1, 1, 6)
    assert common_descendant(expr("n + 1"), 3, 7) == (4, 0, 7)
    assert common_descendant(expr("n"), 1, 2) is None


def test_common_descendant_on_a_cycle():
    spec = table({1: 2, 2: 3, 3: 1})
    assert common_descendant(spec, 1, 3) == (0, 1, 1)


def test_enumerate_examples():
    comps = enumerate_components(expr("n"), range(1, 5))
    assert [c.representative for c in comps] == [1, 2, 3, 4]
    comps = enumerate_components(expr("n + 1"), range(1, 101))
    assert len(comps) == 1 and comps[0].representative == 1 and comps[0].anchor == 1
    comps = enumerate_components(table({1: 2, 2: 1, 3: 4, 4: 3}, "error"), range(1, 5))
    assert [c.cycle.members for c in comps] == [(1, 2), (3, 4)]


def test_enumerate_ownership_and_order():
    comps = enumerate_components(expr("n % 5 + 1"), range(1, 12))
    assert len(comps) == 1
    comps = enumerate_components(table({1: 2, 2: 1, 3: 3, 4: 1, 5: 3}), range(1, 7))
    assert [c.discovery_index for c in comps] == [1, 2, 3]
    assert comps.of(4) is comps[0] and comps.of(5) is comps[1] and comps.of(6) is comps[2]
    assert comps[0].members == [1, 2, 4]


def test_enumerate_collects_unknowns():
    spec = expr("if n % 2 == 0 then n + 3 else max(1, n - 1)", eval_budget=100)
    comps = enumerate_components(spec, range(2, 4))
    assert comps.unknown


def test_tree_slice_examples():
    t = tree_slice(expr("1", preimage_scan_bound=100), 1, 3)
    assert set(t.members) == {2, 3, 4}
    t = tree_slice(table({1: 2, 2: 1, 3: 1, 4: 3}, "error", preimage_scan_bound=4), 1, 10)
    assert set(t.members) == {3, 4}
    t = tree_slice(expr(HALF, preimage_scan_bound=1000), 2, 4)
    assert t.members == (4, 5, 8, 9)
    assert t.children(4) == [8, 9]


def test_tree_slice_excludes_spine_predecessor():
    t = tree_slice(expr(HALF, preimage_scan_bound=100), 3, 10, exclude=6)
    assert 6 not in t.members and 7 in t.members and 14 in t.members


def test_function_spec_tables():
    assert FunctionSpec.from_json('{"map": {"1": 2}, "else": "n"}')(5) == 5
    assert FunctionSpec.from_json({"map": {"1": 2, "3": 7}, "else": "clamp"})(9) == 7
    spec = FunctionSpec.from_json({"map": {"1": 2}})
    assert spec(1) == 2
    with pytest.raises(EvaluationError):
        spec(2)
    with pytest.raises(EvaluationError):
        FunctionSpec.from_table({1: 0})
    with pytest.raises(EvaluationError):
        FunctionSpec(lambda n: 0)(3)


def test_dot_export():
    text = to_dot(table({1: 2, 2: 1, 3: 1}), range(1, 4))
    assert text.startswith("digraph G_h {")
    assert "1 -> 2;" in text and "3 -> 1;" in text
    assert '1 [style=filled' in text and '3 [style' not in text


def test_components_json_shape():
    comps = enumerate_components(table({1: 2, 2: 1}), range(1, 4))
    data = json.loads(components_json(comps))
    assert data["components"][0]["cycle"] == [1, 2]
    assert data["components"][1]["cycle"] == [3]
    assert data["unknown"] == []


tables = st.dictionaries(st.integers(1, 12), st.integers(1, 12), min_size=12, max_size=12)


@settings(max_examples=150, deadline=None)
@given(tables)
def test_components_partition_window(mapping):
    spec = table(mapping)
    comps = enumerate_components(spec, range(1, 13))
    # one cycle per component, and x ~ y exactly when their orbits meet
    for c in comps:
        assert c.cycle is not None
        for u in c.cycle.members:
            assert spec(c.cycle.predecessor(u)) == u
    for x in range(1, 13):
        for y in range(1, 13):
            same = comps.of(x) is comps.of(y)
            assert same == (common_descendant(spec, x, y) is not None)


@settings(max_examples=100, deadline=None)
@given(tables, st.integers(1, 12))
def test_orbit_cycle_is_reached(mapping, n):
    spec = table(mapping)
    r = orbit(spec, n)
    assert r.verdict == "cyclic"
    x = n
    for _ in range(r.tail_length):
        x = spec(x)
    assert x == r.cycle_entry
    for _ in range(r.cycle_length):
        x = spec(x)
    assert x == r.cycle_entry
