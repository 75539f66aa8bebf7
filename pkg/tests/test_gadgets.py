import pytest

from mcwb.core import INF, CapExceeded, ValidationError, componentsOf, isMulticut
from mcwb.gadgets import (
    CspInstance,
    TilingInstance,
    buildGridGadget,
    buildGroup3TCInstance,
    buildTilingInstance,
    checkDiagonalBlocking,
    forcedRepresentationCut,
    groupsSeparated,
    horizontalWeight,
    minGoodCut,
    paperWstar,
    representedPair,
    verifyGadget,
    verticalWeight,
)
from mcwb.oracles import greedyDecomposition, minMulticutByTreewidthDP

FROZEN_WSTAR_D1 = 28700164814  # minimum good-cut weight, repoCell, delta 1


@pytest.fixture(scope="module")
def gadget_d1():
    return buildGridGadget(1, [(1, 1)])


@pytest.fixture(scope="module")
def report_d1(gadget_d1):
    return verifyGadget(gadget_d1)


@pytest.fixture(scope="module")
def good_cut_d1(gadget_d1):
    w, cut, _ = minGoodCut(gadget_d1)
    return w, cut


def reference_weight(N, W, delta, kind, i, j):
    """Independent restatement of the piecewise grid weights."""
    alpha = [N - 2 - delta + s for s in range(1, delta + 1)]
    beta = list(range(1 + delta, delta + delta * delta + 1))
    if kind == "v":
        if i == j - 1:
            return INF
        if j in (0, N):
            return W ** 3 + W ** 2 if i in alpha else INF
        return W ** 2
    if i == 0:
        return W ** 3 + W ** 2 + j * W if j in beta else INF
    if i == N:
        return W ** 3 + W ** 2 + (N - j) * W if j in beta else INF
    if i < j:
        return W ** 2 + j * W
    if i == j:
        return W ** 3 + W ** 2 - i * i * W - (N - i) * (N - i) * W
    return W ** 2 + (N - j) * W


@pytest.mark.parametrize("delta", [1, 2])
def test_weight_tables_match_reference(delta):
    N = delta * delta + 2 * delta + 1
    W = 100 * N * N
    for i in range(N):
        for j in range(N + 1):
            assert verticalWeight(N, W, i, j, delta) == \
                reference_weight(N, W, delta, "v", i, j)
    for i in range(N + 1):
        for j in range(N):
            assert horizontalWeight(N, W, i, j, delta) == \
                reference_weight(N, W, delta, "h", i, j)


def test_delta1_constants(gadget_d1):
    g = gadget_d1
    assert (g.N, g.W) == (4, 1600)
    assert g.graph.n == 25
    assert paperWstar(1) == 7 * 1600 ** 3 + 10 * 1600 ** 2 + 30
    assert paperWstar(1) == 28697600030


def test_build_validation():
    with pytest.raises(ValidationError):
        buildGridGadget(0, [(1, 1)])
    with pytest.raises(ValidationError):
        buildGridGadget(1, [])
    with pytest.raises(ValidationError):
        buildGridGadget(1, [(1, 2)])
    with pytest.raises(ValidationError):
        buildGridGadget(1, [(1, 1)], encoder="nope")


def test_diagonal_blocking():
    for delta in (1, 2):
        g = buildGridGadget(delta, [(1, 1)], encoder="bare")
        assert checkDiagonalBlocking(g)
        # sanity: with nothing removed DL does reach UR
        comps = componentsOf(g.graph)
        assert any(g.DL in c and g.UR in c for c in comps)


def test_representation_sets_delta1(gadget_d1):
    g = gadget_d1
    ul, ur, dl, dr = g.representation_sets(1, 1)
    assert ul == {g.UL, g.u_vertex(1), g.ell_vertex(1)}
    assert ur == {g.UR, g.u_vertex(2), g.r_vertex(1)}
    assert dl == {g.DL, g.d_vertex(1), g.ell_vertex(2)}
    assert dr == {g.DR, g.d_vertex(2), g.r_vertex(2)}


def test_verify_gadget_delta1(report_d1):
    rep = report_d1
    assert rep["passed"]
    assert rep["item1"] and rep["item2"] and rep["item3"]
    assert rep["wstar"] == FROZEN_WSTAR_D1
    assert rep["goodCutCount"] == 1
    assert rep["witnessIsFourCornerCut"]
    assert rep["witnessRepresents"] == (1, 1)


def test_good_cut_structure_delta1(gadget_d1, good_cut_d1):
    g = gadget_d1
    w, cut = good_cut_d1
    assert w == FROZEN_WSTAR_D1
    cut_set = set(cut)
    # both ear edges, all four breakable boundary edges, and exactly one
    # diagonal-path edge must be in the minimum good cut
    assert set(g.ear_eids) <= cut_set
    a = g.alpha(1)
    b = g.beta(1, 1)
    boundary = {g.vertical_eid[(a, 0)], g.vertical_eid[(a, g.N)],
                g.horizontal_eid[(0, b)], g.horizontal_eid[(g.N, b)]}
    assert boundary <= cut_set
    assert len(cut_set & set(g.diagonal_path_eids())) == 1
    assert representedPair(g, cut) == (1, 1)


def test_forced_cut_matches_good_cut_weight(gadget_d1):
    w, cut, _ = forcedRepresentationCut(gadget_d1, (1, 1))
    assert w == FROZEN_WSTAR_D1
    assert representedPair(gadget_d1, cut) == (1, 1)
    with pytest.raises(ValidationError):
        forcedRepresentationCut(gadget_d1, (1, 2))


def test_shortcut_encoder_fails_counting():
    g = buildGridGadget(1, [(1, 1)], encoder="shortcut")
    rep = verifyGadget(g)
    assert not rep["item2"]
    assert not rep["passed"]


def test_delta2_certification_is_refused():
    g = buildGridGadget(2, [(1, 1)])
    with pytest.raises(CapExceeded):
        minGoodCut(g)


def loop_tiling():
    # one tile, every side glued to itself: identifications are no-ops
    return TilingInstance(1, 1, [(0, 0, s, s) for s in "UDLR"], [[(1, 1)]])


def pair_tiling():
    # two tiles glued side to same-labeled side on all four sides
    return TilingInstance(1, 2, [(0, 1, s, s) for s in "UDLR"],
                          [[(1, 1)], [(1, 1)]])


def test_tiling_validation_and_json():
    t = pair_tiling()
    assert TilingInstance.from_json(t.to_json()).edges == t.edges
    with pytest.raises(ValidationError):
        TilingInstance(1, 1, [(0, 0, "U", "U"), (0, 0, "L", "L")],
                       [[(1, 1)]])  # D and R unused
    with pytest.raises(ValidationError):
        TilingInstance(1, 1, [(0, 0, "U", "D"), (0, 0, "L", "R")],
                       [[(1, 1)]])  # mismatched side labels
    with pytest.raises(ValidationError):
        TilingInstance(1, 1, [(0, 0, s, s) for s in "UDLR"], [[]])
    with pytest.raises(ValidationError):
        TilingInstance(1, 1, [(0, 0, s, s) for s in "UDLR"], [[(1, 2)]])


def test_tiling_reduction_structure():
    red4 = buildTilingInstance(pair_tiling(), mode="four-terminal")
    # 50 vertices, minus 4 corner merges, minus 2 per glued side
    assert red4.instance.graph.n == 38
    assert len(set(red4.terminals.values())) == 4
    assert red4.instance.budget == 2 * FROZEN_WSTAR_D1
    red3 = buildTilingInstance(pair_tiling(), mode="three-terminal")
    assert red3.instance.graph.n == 37
    assert len(set(red3.terminals.values())) == 3


def test_tiling_forward_soundness():
    for tiling in (loop_tiling(), pair_tiling()):
        red = buildTilingInstance(tiling, mode="four-terminal")
        cuts = []
        for g in red.gadgets:
            _, cut, _ = forcedRepresentationCut(g, (1, 1))
            cuts.append(cut)
        lifted = red.lift_cut(cuts)
        inst = red.instance
        assert isMulticut(inst, lifted)
        assert groupsSeparated(inst.graph, lifted, red.groups)
        weight = sum(inst.graph.weight(e) for e in lifted)
        assert weight == inst.budget


def test_tiling_reverse_within_width_budget():
    red = buildTilingInstance(loop_tiling(), mode="four-terminal")
    td = greedyDecomposition(red.instance.graph)
    if td.width > 14:
        pytest.skip(f"heuristic width {td.width} over budget")
    w, cut, _ = minMulticutByTreewidthDP(red.instance, td)
    assert w == red.instance.budget
    assert isMulticut(red.instance, cut)


def toy_csp():
    return CspInstance(1, 1, [(0, 0), (0, 0)], [[0, 1, 0, 1]],
                       [[(1, 1)], [(1, 1)]])


def test_csp_validation_and_json():
    c = toy_csp()
    assert list(c.satisfying_assignments()) == [(1,)]
    assert CspInstance.from_json(c.to_json()).edges == c.edges
    with pytest.raises(ValidationError):
        CspInstance(1, 1, [(0, 0), (0, 0)], [[0, 0, 0, 1]],
                    [[(1, 1)], [(1, 1)]])  # edge 0 at three slots
    with pytest.raises(ValidationError):
        CspInstance(1, 1, [(0, 0), (0, 0)], [[0, 1, 0, 1]],
                    [[(1, 1)], []])  # empty relation


def test_csp_reduction_structure_and_forward_soundness():
    red = buildGroup3TCInstance(toy_csp())
    assert len(red.cycles) == 7  # 1 variable + 2 edges + 4 incidences
    assert sorted(len(g) for g in red.groups) == [4, 4, 4]
    assert sum(len(g) for g in red.groups) == 12
    assert red.instance.budget == 7 * FROZEN_WSTAR_D1
    # forward: the satisfying assignment induces per-gadget forced cuts
    # whose union is a multicut of weight exactly the budget
    cuts = []
    for g in red.gadgets:
        assert (1, 1) in g.S
        _, cut, _ = forcedRepresentationCut(g, (1, 1))
        cuts.append(cut)
    lifted = red.lift_cut(cuts)
    inst = red.instance
    assert isMulticut(inst, lifted)
    assert groupsSeparated(inst.graph, lifted, red.groups)
    weight = sum(inst.graph.weight(e) for e in lifted)
    assert weight == inst.budget
    # all quad vertices end up in distinct components
    comp_of = {}
    for idx, comp in enumerate(componentsOf(inst.graph, lifted)):
        for v in comp:
            comp_of[v] = idx
    owners = [comp_of[t] for t in red.terminals.values()]
    assert len(set(owners)) == len(owners) == 12
