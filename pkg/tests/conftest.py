"""Shared test helpers: small-graph enumeration and instance builders."""

import itertools

import networkx as nx
import pytest

from mcwb.core import DemandPattern, MulticutInstance, WeightedGraph


def graphs_up_to_iso(n, connected_only=False):
    """All graphs on exactly n labeled vertices, one per isomorphism
    class, as networkx graphs."""
    seen = {}
    out = []
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        edges = [p for i, p in enumerate(pairs) if mask >> i & 1]
        G = nx.Graph()
        G.add_nodes_from(range(n))
        G.add_edges_from(edges)
        if connected_only and n > 0 and not nx.is_connected(G):
            continue
        key = nx.weisfeiler_lehman_graph_hash(G, iterations=3)
        if any(nx.is_isomorphic(G, H) for H in seen.get(key, [])):
            continue
        seen.setdefault(key, []).append(G)
        out.append(G)
    return out


def instance_from_lists(n, edges, demands, budget=None, rotation=None):
    g = WeightedGraph(n)
    for (u, v, w) in edges:
        g.add_edge(u, v, w)
    terminals = sorted({v for d in demands for v in d})
    return MulticutInstance(g, DemandPattern(terminals, demands),
                            budget, rotation)


def path_instance(weights, demands):
    n = len(weights) + 1
    return instance_from_lists(
        n, [(i, i + 1, w) for i, w in enumerate(weights)], demands,
        rotation=[[eid for eid in (i - 1, i) if 0 <= eid < n - 1]
                  for i in range(n)])


@pytest.fixture(scope="session")
def small_connected_graphs():
    out = []
    for n in range(2, 6):
        out.extend((n, G) for G in graphs_up_to_iso(n, connected_only=True))
    return out
