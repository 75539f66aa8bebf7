import itertools

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from mcwb.core import CapExceeded
from mcwb.patterns import (
    ProjectionWitness,
    applyProjection,
    classifyPattern,
    cographAnalysis,
    complete_tripartite,
    delete_step,
    extendedBicliqueDistance,
    graphs_isomorphic,
    identify_step,
    isProjection,
    isTrivialPattern,
    triangleWitness,
)

from conftest import graphs_up_to_iso


def G(n, edges):
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edges)
    return g


def test_trivial_patterns():
    assert isTrivialPattern(G(0, []))
    assert isTrivialPattern(G(4, []))
    assert isTrivialPattern(G(4, [(0, 1), (2, 3)]))  # two edges
    assert isTrivialPattern(nx.complete_bipartite_graph(2, 3))
    assert isTrivialPattern(G(6, list(nx.complete_bipartite_graph(2, 3).edges)))
    assert not isTrivialPattern(nx.complete_graph(3))
    assert not isTrivialPattern(nx.path_graph(4))


def test_triangle_witness_on_path4():
    H = nx.path_graph(4)
    w = triangleWitness(H)
    assert w is not None and w.verify()
    assert graphs_isomorphic(w.replay(), nx.complete_graph(3))


def test_triangle_witness_iff_nontrivial_small():
    for n in range(1, 6):
        for H in graphs_up_to_iso(n):
            w = triangleWitness(H)
            if isTrivialPattern(H):
                assert w is None
            else:
                assert w is not None and w.verify()


def test_apply_projection_semantics():
    H = nx.path_graph(4)  # 0-1-2-3
    K = applyProjection(H, [identify_step(0, 3)])
    # identifying the endpoints of P4 yields a 3-cycle
    assert graphs_isomorphic(K, nx.complete_graph(3))
    K = applyProjection(H, [delete_step(0)])
    assert graphs_isomorphic(K, nx.path_graph(3))
    with pytest.raises(Exception):
        applyProjection(H, [identify_step(0, 1)])  # adjacent pair


def test_is_projection_examples():
    assert isProjection(nx.complete_graph(3), nx.path_graph(4))
    assert isProjection(nx.path_graph(3), nx.path_graph(4))
    # K4 cannot come from a 4-vertex path by deletions/identifications
    assert not isProjection(nx.complete_graph(4), nx.path_graph(4))


def test_extended_biclique_distance_values():
    mu, part, exact = extendedBicliqueDistance(nx.complete_bipartite_graph(3, 3))
    assert (mu, exact) == (0, True) and part.verify(nx.complete_bipartite_graph(3, 3))
    mu, part, exact = extendedBicliqueDistance(nx.complete_graph(3))
    assert (mu, exact) == (1, True)
    mu, part, exact = extendedBicliqueDistance(nx.path_graph(4))
    assert (mu, exact) == (1, True)
    H = complete_tripartite(2)  # K_{2,2,2}
    mu, part, exact = extendedBicliqueDistance(H)
    assert (mu, exact) == (2, True) and part.verify(H)


def test_cograph_analysis():
    rep = cographAnalysis(nx.path_graph(4))
    assert not rep["isCograph"] and rep["inducedP4"] is not None
    rep = cographAnalysis(nx.complete_graph(4))
    assert rep["isCograph"]


def test_classify_clique_and_tripartite():
    v = classifyPattern(nx.complete_graph(3), 3)
    assert v.outcome == "clique" and v.witness.verify()
    v = classifyPattern(complete_tripartite(2), 2)
    assert v.outcome in ("tripartite", "clique")
    if v.outcome == "tripartite":
        assert v.witness.verify()
    v = classifyPattern(nx.complete_bipartite_graph(3, 3), 3)
    assert v.outcome == "bounded-distance" and v.mu == 0
    assert v.partition.verify(nx.complete_bipartite_graph(3, 3))


def test_classify_caps():
    with pytest.raises(CapExceeded):
        classifyPattern(nx.complete_graph(3), 5)
    with pytest.raises(CapExceeded):
        classifyPattern(nx.complete_graph(17), 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2 ** 15 - 1))
def test_witnesses_replay_on_random_graphs(n, mask):
    pairs = list(itertools.combinations(range(n), 2))
    H = G(n, [p for i, p in enumerate(pairs) if mask >> i & 1])
    w = triangleWitness(H)
    if w is not None:
        assert w.verify()
        assert graphs_isomorphic(w.replay(), nx.complete_graph(3))
    mu, part, exact = extendedBicliqueDistance(H)
    assert exact
    assert part.verify(H)
    assert len(part.X) == mu


def test_witness_json_round_trip():
    H = nx.path_graph(4)
    w = triangleWitness(H)
    steps = ProjectionWitness.steps_from_json(w.to_json())
    assert graphs_isomorphic(applyProjection(H, steps), nx.complete_graph(3))
