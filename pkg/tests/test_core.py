import json

import pytest
from hypothesis import given, strategies as st

from mcwb.core import (
    INF,
    DemandPattern,
    MulticutInstance,
    WeightedGraph,
    canonicalizeSolution,
    componentsOf,
    contractInfinityEdges,
    instance_from_json,
    instance_to_json,
    is_finite,
    isMulticut,
    weight_from_json,
    weight_to_json,
)


def test_infinity_ordering_and_arithmetic():
    assert INF > 10 ** 30
    assert not (INF < 5)
    assert INF + 7 is INF
    assert 7 + INF is INF
    assert INF + INF is INF
    assert INF == INF
    assert not is_finite(INF)
    assert is_finite(0) and is_finite(10 ** 40)


def test_weight_json_round_trip():
    for w in (0, 5, 1600 ** 3, INF):
        assert weight_from_json(weight_to_json(w)) == w
    assert weight_to_json(INF) == "inf"


def test_graph_basics_and_multi_edges():
    g = WeightedGraph(3)
    e0 = g.add_edge(0, 1, 2)
    e1 = g.add_edge(0, 1, 3)  # parallel edge kept separate
    e2 = g.add_edge(2, 2, 1)  # loop allowed
    assert (e0, e1, e2) == (0, 1, 2)
    assert g.edge_count() == 3
    assert g.weight(e1) == 3
    assert g.endpoints(e2) == (2, 2)


def test_components_respect_removed_edges():
    g = WeightedGraph(4)
    g.add_edge(0, 1, 1)
    g.add_edge(1, 2, 1)
    g.add_edge(2, 3, 1)
    assert componentsOf(g) == [[0, 1, 2, 3]]
    assert componentsOf(g, {1}) == [[0, 1], [2, 3]]
    assert componentsOf(g, {0, 1, 2}) == [[0], [1], [2], [3]]


def test_is_multicut_and_canonicalize():
    g = WeightedGraph(3)
    g.add_edge(0, 1, 1)
    g.add_edge(1, 2, 1)
    inst = MulticutInstance(g, DemandPattern([0, 2], [(0, 2)]))
    assert not isMulticut(inst, [])
    assert isMulticut(inst, [0])
    assert isMulticut(inst, [1])
    assert canonicalizeSolution({1, 0, 1}) == [0, 1]


def test_demand_pattern_validation():
    with pytest.raises(ValueError):
        DemandPattern([0, 1], [(0, 0)])
    with pytest.raises(ValueError):
        DemandPattern([0], [(0, 1)])
    g = WeightedGraph(2)
    with pytest.raises(ValueError):
        MulticutInstance(g, DemandPattern([5], []))


def test_contract_infinity_edges():
    g = WeightedGraph(4)
    g.add_edge(0, 1, INF)
    g.add_edge(1, 2, 3)
    g.add_edge(2, 3, INF)
    inst = MulticutInstance(g, DemandPattern([0, 3], [(0, 3)]))
    out, vmap = contractInfinityEdges(inst)
    assert out.graph.n == 2 and out.graph.edge_count() == 1
    assert vmap[0] == vmap[1] and vmap[2] == vmap[3]
    assert set(out.pattern.demand_edges) == {(0, 1)}
    # a demanded pair joined by an INF path means the optimum is INF
    inst = MulticutInstance(g, DemandPattern([0, 1], [(0, 1)]))
    out, _ = contractInfinityEdges(inst)
    assert out is None


def test_instance_json_round_trip():
    g = WeightedGraph(3)
    g.add_edge(0, 1, 4)
    g.add_edge(1, 2, INF)
    inst = MulticutInstance(g, DemandPattern([0, 2], [(0, 2)]), budget=9,
                            rotation=[[0], [0, 1], [1]])
    blob = json.dumps(instance_to_json(inst))
    back = instance_from_json(json.loads(blob))
    assert back.graph.edges == inst.graph.edges
    assert back.pattern.demand_edges == inst.pattern.demand_edges
    assert back.budget == 9
    assert back.rotation == inst.rotation


@given(st.lists(st.integers(0, 40), max_size=12))
def test_canonicalize_is_sorted_dedup(ids):
    out = canonicalizeSolution(ids)
    assert out == sorted(set(ids))
    assert canonicalizeSolution(out) == out


@given(st.integers(2, 7), st.sets(st.integers(0, 20), max_size=10))
def test_components_partition_vertices(n, removed):
    g = WeightedGraph(n)
    for v in range(1, n):
        g.add_edge(v - 1, v, 1)
    g.add_edge(0, n - 1, 1)
    removed = {e for e in removed if e < g.edge_count()}
    comps = componentsOf(g, removed)
    flat = sorted(v for c in comps for v in c)
    assert flat == list(range(n))
