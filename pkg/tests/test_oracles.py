import itertools
import random

import pytest

from mcwb.core import (
    INF,
    CapExceeded,
    DemandPattern,
    MulticutInstance,
    WeightedGraph,
    isMulticut,
)
from mcwb.oracles import (
    GroupConstraint,
    TreeDecomposition,
    bruteForceOptimalCutCount,
    exactTreewidth,
    greedyDecomposition,
    minMulticutByPartition,
    minMulticutByTreewidthDP,
)

from conftest import instance_from_lists, path_instance


def test_partition_oracle_on_path():
    inst = path_instance([3, 1, 4], [(0, 3)])
    w, cut = minMulticutByPartition(inst)
    assert w == 1 and cut == [1]


def test_partition_oracle_square_opposite_pairs():
    # both diagonals demanded on a unit 4-cycle: splitting into two
    # opposite edges costs 2, which is optimal
    inst = instance_from_lists(
        4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)], [(0, 2), (1, 3)])
    w, cut = minMulticutByPartition(inst)
    assert w == 2
    assert isMulticut(inst, cut)


def test_partition_oracle_inf_and_zero_edges():
    inst = instance_from_lists(3, [(0, 1, INF), (1, 2, 0)], [(0, 1)])
    w, _ = minMulticutByPartition(inst)
    assert w is INF
    inst = instance_from_lists(3, [(0, 1, 0), (1, 2, 5)], [(0, 2)])
    w, cut = minMulticutByPartition(inst)
    assert w == 0 and 0 in cut


def test_partition_oracle_cap():
    g = WeightedGraph(13)
    inst = MulticutInstance(g, DemandPattern([], []))
    with pytest.raises(CapExceeded):
        minMulticutByPartition(inst)


def test_greedy_decomposition_validates():
    g = WeightedGraph(6)
    for (u, v) in [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)]:
        g.add_edge(u, v, 1)
    td = greedyDecomposition(g)
    td.validate(g)
    assert td.width >= 2


def test_exact_treewidth_known_values():
    def graph(n, edges):
        g = WeightedGraph(n)
        for (u, v) in edges:
            g.add_edge(u, v, 1)
        return g

    tree = graph(5, [(0, 1), (1, 2), (1, 3), (3, 4)])
    assert exactTreewidth(tree)[0] == 1
    cycle = graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])
    assert exactTreewidth(cycle)[0] == 2
    k4 = graph(4, list(itertools.combinations(range(4), 2)))
    assert exactTreewidth(k4)[0] == 3
    grid = graph(9, [(r * 3 + c, r * 3 + c + 1)
                     for r in range(3) for c in range(2)] +
                 [(r * 3 + c, (r + 1) * 3 + c)
                  for r in range(2) for c in range(3)])
    assert exactTreewidth(grid)[0] == 3


def test_twdp_matches_partition_on_random_instances():
    rng = random.Random(11)
    for _ in range(40):
        n = rng.randint(3, 8)
        g = WeightedGraph(n)
        for v in range(1, n):
            g.add_edge(rng.randrange(v), v, rng.randint(0, 6))
        for _ in range(rng.randint(0, 4)):
            u, v = rng.randrange(n), rng.randrange(n)
            if u != v:
                g.add_edge(u, v, rng.randint(0, 6))
        terms = sorted(rng.sample(range(n), rng.randint(2, min(4, n))))
        pairs = list(itertools.combinations(terms, 2))
        demands = rng.sample(pairs, rng.randint(1, len(pairs)))
        inst = MulticutInstance(g, DemandPattern(terms, demands))
        w1, c1 = minMulticutByPartition(inst)
        w2, c2, _ = minMulticutByTreewidthDP(inst)
        assert w1 == w2
        if w1 is not INF:
            assert isMulticut(inst, c1) and isMulticut(inst, c2)


def test_twdp_counting_matches_brute_force():
    rng = random.Random(5)
    for _ in range(25):
        n = rng.randint(3, 6)
        g = WeightedGraph(n)
        for v in range(1, n):
            g.add_edge(rng.randrange(v), v, rng.randint(1, 3))
        for _ in range(rng.randint(0, 3)):
            u, v = rng.randrange(n), rng.randrange(n)
            if u != v:
                g.add_edge(u, v, rng.randint(1, 3))
        if g.edge_count() > 16:
            continue
        terms = sorted(rng.sample(range(n), 2))
        inst = MulticutInstance(g, DemandPattern(terms, [tuple(terms)]))
        w, _, count = minMulticutByTreewidthDP(inst, mode="count-optima")
        bw, bcount = bruteForceOptimalCutCount(inst)
        assert (w, count) == (bw, bcount)


def test_group_constraint_forces_components():
    # a path 0-1-2-3 with groups {0},{3} and forced separation of all
    # group pairs must cut one edge; forcing 1 with 0 and 2 with 3 pins
    # the cut to the middle edge
    inst = instance_from_lists(4, [(0, 1, 5), (1, 2, 1), (2, 3, 5)], [])
    gc = GroupConstraint([[0, 1], [2, 3]])
    w, cut, _ = minMulticutByTreewidthDP(inst, constraint=gc)
    assert w == 1 and cut == [1]
    gc = GroupConstraint([[0], [1], [2], [3]])
    w, _, _ = minMulticutByTreewidthDP(inst, constraint=gc)
    assert w == 11
