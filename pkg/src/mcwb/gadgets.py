"""Grid gadgets with exact piecewise weights, operational certification of
the good-cut properties, and the reductions that assemble gadgets into
multiway-cut and group-cut instances.

A grid gadget is an (N+1) x (N+1) weighted grid with two ear edges and
encoder-supplied inner-cell edges.  Its interesting cuts are good cuts:
edge sets after whose removal the components of UL and DR contain no
other corner.  Certification is operational: the treewidth DP computes
minimum good cuts, minimum cuts forced to represent a pair, and exact
counts of optimal cut sets, and verifyGadget compares them.
"""

import itertools

from .core import (
    INF,
    CapExceeded,
    DemandPattern,
    MulticutInstance,
    ValidationError,
    WeightedGraph,
    componentsOf,
    is_finite,
)
from .oracles import (
    GroupConstraint,
    greedyDecomposition,
    minMulticutByTreewidthDP,
)

GADGET_WIDTH_CAP = 9


def verticalWeight(N, W, i, j, delta):
    """Weight of the vertical grid edge g[i,j] - g[i+1,j]."""
    assert 0 <= i < N and 0 <= j <= N
    alo, ahi = N - 1 - delta, N - 2  # alpha(1) .. alpha(delta)
    if i == j - 1:
        return INF  # the diagonal
    if j == 0 or j == N:
        if alo <= i <= ahi:
            return W ** 3 + W ** 2  # breakable part of the boundary column
        return INF
    return W ** 2


def horizontalWeight(N, W, i, j, delta):
    """Weight of the horizontal grid edge g[i,j] - g[i,j+1]."""
    assert 0 <= i <= N and 0 <= j < N
    blo, bhi = 1 + delta, delta + delta * delta  # beta(1,1) .. beta(delta,delta)
    if i == 0:
        if blo <= j <= bhi:
            return W ** 3 + W ** 2 + j * W  # breakable part of the top row
        return INF
    if i == N:
        if blo <= j <= bhi:
            return W ** 3 + W ** 2 + (N - j) * W  # breakable bottom row
        return INF
    if i < j:
        return W ** 2 + j * W  # top-right triangle, increasing to the right
    if i == j:
        return W ** 3 + W ** 2 - i * i * W - (N - i) * (N - i) * W  # diagonal
    return W ** 2 + (N - j) * W  # bottom-left triangle, increasing to the left


def paperWstar(delta):
    """The reference optimum formula for the original inner-cell encoder:
    7 W^3 + (2N+2) W^2 + 4 (2N-3) + 10."""
    N = delta * delta + 2 * delta + 1
    W = 100 * N * N
    return 7 * W ** 3 + (2 * N + 2) * W ** 2 + 4 * (2 * N - 3) + 10


class GridGadget:
    """The grid, its special vertices, and the assembled weighted graph.

    Vertices are g[i,j] = i*(N+1)+j for 0 <= i,j <= N.  Edge ids are laid
    out deterministically: verticals row-major, then horizontals, then the
    two ear chains, then the encoder's inner-cell edges.
    """

    def __init__(self, delta, S, encoder):
        self.delta = delta
        self.S = frozenset((int(x), int(y)) for (x, y) in S)
        self.encoder = encoder
        self.N = delta * delta + 2 * delta + 1
        self.W = 100 * self.N * self.N
        self._wstar = None
        self._build()

    def vid(self, i, j):
        assert 0 <= i <= self.N and 0 <= j <= self.N
        return i * (self.N + 1) + j

    def alpha(self, s):
        return self.N - 2 - self.delta + s

    def beta(self, r, s):
        return r + self.delta * s

    @property
    def UL(self):
        return self.vid(0, 0)

    @property
    def UR(self):
        return self.vid(0, self.N)

    @property
    def DL(self):
        return self.vid(self.N, 0)

    @property
    def DR(self):
        return self.vid(self.N, self.N)

    def corners(self):
        return {"UL": self.UL, "UR": self.UR, "DL": self.DL, "DR": self.DR}

    def u_vertex(self, s):
        return self.vid(0, self.beta(1, s))

    def d_vertex(self, s):
        return self.vid(self.N, self.beta(1, s))

    def ell_vertex(self, s):
        return self.vid(self.alpha(s), 0)

    def r_vertex(self, s):
        return self.vid(self.alpha(s), self.N)

    def side_vertices(self, side):
        """The delta+1 non-corner distinguished vertices of a side, in the
        order of their index s."""
        pick = {"U": self.u_vertex, "D": self.d_vertex,
                "L": self.ell_vertex, "R": self.r_vertex}[side]
        return [pick(s) for s in range(1, self.delta + 2)]

    def _build(self):
        N, W, d = self.N, self.W, self.delta
        g = WeightedGraph((N + 1) * (N + 1))
        self.vertical_eid = {}
        self.horizontal_eid = {}
        for i in range(N):
            for j in range(N + 1):
                eid = g.add_edge(self.vid(i, j), self.vid(i + 1, j),
                                 verticalWeight(N, W, i, j, d))
                self.vertical_eid[(i, j)] = eid
        for i in range(N + 1):
            for j in range(N):
                eid = g.add_edge(self.vid(i, j), self.vid(i, j + 1),
                                 horizontalWeight(N, W, i, j, d))
                self.horizontal_eid[(i, j)] = eid
        self.ear_eids = []
        for s in range(1, d + 1):
            self.ear_eids.append(
                g.add_edge(self.u_vertex(s), self.u_vertex(s + 1), W ** 3))
        for s in range(1, d + 1):
            self.ear_eids.append(
                g.add_edge(self.d_vertex(s), self.d_vertex(s + 1), W ** 3))
        self.inner_eids = []
        for (u, v, w) in ENCODERS[self.encoder](self):
            self.inner_eids.append(g.add_edge(u, v, w))
        self.graph = g

    def diagonal_path_vertices(self):
        out = [self.vid(0, 0)]
        for i in range(self.N):
            out.append(self.vid(i, i + 1))
            if i + 1 <= self.N:
                out.append(self.vid(i + 1, i + 1))
        seen = []
        for v in out:
            if v not in seen:
                seen.append(v)
        return seen

    def diagonal_path_eids(self):
        """Edge ids along the diagonal path (finite horizontals only; the
        vertical steps of the path are INF and uncuttable)."""
        return [self.horizontal_eid[(i, i)] for i in range(1, self.N)]

    def representation_sets(self, x, y):
        """The four corner-side vertex sets a cut representing (x,y) must
        realize as its components' distinguished members."""
        d = self.delta
        ul = {self.UL} | {self.u_vertex(s) for s in range(1, y + 1)} \
            | {self.ell_vertex(s) for s in range(1, x + 1)}
        ur = {self.UR} | {self.u_vertex(s) for s in range(y + 1, d + 2)} \
            | {self.r_vertex(s) for s in range(1, x + 1)}
        dl = {self.DL} | {self.d_vertex(s) for s in range(1, y + 1)} \
            | {self.ell_vertex(s) for s in range(x + 1, d + 2)}
        dr = {self.DR} | {self.d_vertex(s) for s in range(y + 1, d + 2)} \
            | {self.r_vertex(s) for s in range(x + 1, d + 2)}
        return [ul, ur, dl, dr]

    def wstar(self):
        """Encoder-relative optimum: the computed minimum good-cut weight.
        Identical across choices of S for a fixed delta; verifyGadget
        asserts this operationally."""
        if self._wstar is None:
            self._wstar, _, _ = minGoodCut(self)
        return self._wstar

    def to_json(self):
        return {
            "delta": self.delta,
            "S": sorted(self.S),
            "N": self.N,
            "W": self.W,
            "encoder": self.encoder,
            "vertices": self.graph.n,
            "edges": self.graph.edge_count(),
            "paperWstar": paperWstar(self.delta),
        }


# ---------------------------------------------------------------------------
# inner-cell encoders
# ---------------------------------------------------------------------------

def _encoder_bare(gadget):
    """No inner-cell edges; the skeleton only."""
    return []


def _selector_pair(gadget, r, c):
    """The pair (x, y) selected when the cut's horizontal line runs at row
    gap r and its vertical line at column gap c, or None."""
    d, N = gadget.delta, gadget.N
    if not (N - 1 - d <= r <= N - 2):  # r = alpha(x)
        return None
    if not (1 + d <= c <= d + d * d):  # c in the beta window
        return None
    x = r - (N - 2 - d)
    y = (c - 1) // d
    return (x, y)


def _encoder_repo_cell(gadget):
    """Both diagonals of every cell at weight 1, with a penalty on the
    diagonals of selector cells whose (row gap, column gap) position would
    encode a pair outside S.  Certified by verifyGadget's counting DP."""
    penalty = 8
    out = []
    N = gadget.N
    for i in range(N):
        for j in range(N):
            w = 1
            pair = _selector_pair(gadget, i, j)
            if pair is not None and pair not in gadget.S:
                w = 1 + penalty
            out.append((gadget.vid(i, j), gadget.vid(i + 1, j + 1), w))
            out.append((gadget.vid(i, j + 1), gadget.vid(i + 1, j), w))
    return out


def _encoder_shortcut(gadget):
    """Adversarial variant for negative tests: the repo encoder plus a
    zero-weight UR-DL shortcut.  Good cuts may leave the shortcut uncut
    (UR and DL are allowed to stay connected) while representing cuts
    must cut it, so the counting equality between the two breaks."""
    return _encoder_repo_cell(gadget) + [(gadget.UR, gadget.DL, 0)]


ENCODERS = {
    "bare": _encoder_bare,
    "repoCell": _encoder_repo_cell,
    "shortcut": _encoder_shortcut,
}


def buildGridGadget(delta, S, encoder="repoCell"):
    if delta < 1:
        raise ValidationError("delta must be at least 1")
    S = list(S)
    if not S:
        raise ValidationError("S must be nonempty")
    for (x, y) in S:
        if not (1 <= x <= delta and 1 <= y <= delta):
            raise ValidationError(f"pair {(x, y)} outside [delta]^2")
    if encoder not in ENCODERS:
        raise ValidationError(f"unknown encoder {encoder!r}")
    return GridGadget(delta, S, encoder)


def checkDiagonalBlocking(gadget):
    """True iff every DL-UR path meets the diagonal path: deleting the
    diagonal-path vertices must disconnect DL from UR."""
    g = gadget.graph
    blocked = set(gadget.diagonal_path_vertices())
    if gadget.DL in blocked or gadget.UR in blocked:
        return False
    adj = g.adjacency()
    seen = {gadget.DL}
    stack = [gadget.DL]
    while stack:
        v = stack.pop()
        for (u, _) in adj[v]:
            if u not in blocked and u not in seen:
                seen.add(u)
                stack.append(u)
    return gadget.UR not in seen


# ---------------------------------------------------------------------------
# good cuts and representation cuts
# ---------------------------------------------------------------------------

def _good_cut_instance(gadget):
    """Good cuts are multicuts for every corner pair except UR-DL."""
    c = gadget.corners()
    terminals = sorted(c.values())
    demands = sorted(
        tuple(sorted(p)) for p in [
            (c["UL"], c["UR"]), (c["UL"], c["DL"]), (c["UL"], c["DR"]),
            (c["DR"], c["UR"]), (c["DR"], c["DL"])])
    return MulticutInstance(gadget.graph, DemandPattern(terminals, demands),
                            None, None)


def _gadget_decomposition(gadget):
    td = greedyDecomposition(gadget.graph)
    if td.width > GADGET_WIDTH_CAP:
        raise CapExceeded(
            f"gadget decomposition width {td.width} exceeds cap "
            f"{GADGET_WIDTH_CAP}; certification is refused, not guessed")
    return td


def minGoodCut(gadget, mode="optimize"):
    """Exact minimum good cut via the treewidth DP.

    Returns (weight, cut, count); count is None unless mode is "count".
    """
    inst = _good_cut_instance(gadget)
    td = _gadget_decomposition(gadget)
    dp_mode = "count-optima" if mode == "count" else "optimize"
    weight, cut, count = minMulticutByTreewidthDP(inst, td, mode=dp_mode)
    if gadget._wstar is None and is_finite(weight):
        gadget._wstar = weight
    return weight, cut, count


def forcedRepresentationCut(gadget, pair, mode="optimize"):
    """Exact minimum cut whose components realize the four corner-side
    sets prescribed for the pair (x, y).

    Returns (weight, cut, count); weight INF when infeasible.
    """
    x, y = pair
    d = gadget.delta
    if not (1 <= x <= d and 1 <= y <= d):
        raise ValidationError(f"pair {(x, y)} outside [delta]^2")
    groups = gadget.representation_sets(x, y)
    constraint = GroupConstraint(groups)
    inst = MulticutInstance(gadget.graph, DemandPattern([], []), None, None)
    td = _gadget_decomposition(gadget)
    dp_mode = "count-optima" if mode == "count" else "optimize"
    weight, cut, count = minMulticutByTreewidthDP(
        inst, td, constraint=constraint, mode=dp_mode)
    return weight, cut, count


def _is_four_corner_cut(gadget, cut):
    comps = componentsOf(gadget.graph, cut)
    corner_set = set(gadget.corners().values())
    per = [len(corner_set & set(comp)) for comp in comps]
    return len(comps) == 4 and all(p == 1 for p in per)


def representedPair(gadget, cut):
    """The pair (x, y) a cut represents, or None."""
    if not _is_four_corner_cut(gadget, cut):
        return None
    comps = [set(c) for c in componentsOf(gadget.graph, cut)]

    def comp_of(v):
        for idx, comp in enumerate(comps):
            if v in comp:
                return idx
        raise AssertionError(v)

    d = gadget.delta
    for x in range(1, d + 1):
        for y in range(1, d + 1):
            sets = gadget.representation_sets(x, y)
            owners = []
            ok = True
            for group in sets:
                cs = {comp_of(v) for v in group}
                if len(cs) != 1:
                    ok = False
                    break
                owners.append(next(iter(cs)))
            if ok and len(set(owners)) == 4:
                return (x, y)
    return None


def verifyGadget(gadget):
    """Certify the encoder against the three good-cut properties.

    item1: every pair in S admits a forced representation cut of weight
    exactly the encoder-relative optimum.  item3: the minimum good cut
    weight equals that optimum.  item2, by counting: the number of
    optimal good cut sets equals the sum over S of the forced optimal
    counts, so every optimal good cut represents a pair in S.
    """
    weight, cut, good_count = minGoodCut(gadget, mode="count")
    report = {
        "delta": gadget.delta,
        "S": sorted(gadget.S),
        "encoder": gadget.encoder,
        "wstar": weight,
        "goodCutCount": good_count,
        "witnessIsFourCornerCut": _is_four_corner_cut(gadget, cut),
        "witnessRepresents": representedPair(gadget, cut),
    }
    forced = {}
    forced_total = 0
    item1 = True
    for pair in sorted(gadget.S):
        fw, fcut, fcount = forcedRepresentationCut(gadget, pair, mode="count")
        forced[pair] = {"weight": fw, "count": fcount}
        if fw != weight:
            item1 = False
        if fw == weight:
            forced_total += fcount
    report["forced"] = {str(k): v for k, v in sorted(forced.items())}
    report["item1"] = item1
    report["item2"] = (good_count == forced_total)
    report["item2Counts"] = {"good": good_count, "forcedTotal": forced_total}
    report["item3"] = is_finite(weight)
    report["passed"] = bool(report["item1"] and report["item2"]
                            and report["item3"]
                            and report["witnessIsFourCornerCut"])
    return report


# ---------------------------------------------------------------------------
# gluing gadgets into larger instances
# ---------------------------------------------------------------------------

SIDES = ("U", "D", "L", "R")

# each side runs between two corners; side_vertices are ordered from the
# first listed corner towards the second
SIDE_CORNERS = {"U": ("UL", "UR"), "D": ("DL", "DR"),
                "L": ("UL", "DL"), "R": ("UR", "DR")}

_WSTAR_CACHE = {}


def _cached_wstar(gadget):
    key = (gadget.delta, gadget.S, gadget.encoder)
    if key not in _WSTAR_CACHE:
        _WSTAR_CACHE[key] = gadget.wstar()
    return _WSTAR_CACHE[key]


class _GadgetUnion:
    """Disjoint union of gadget graphs with vertex identifications.

    Local vertices are (gadget index, local id).  Identified classes
    become single output vertices; edges are never merged, so gluing
    creates parallel edges on purpose.
    """

    def __init__(self, gadgets):
        self.gadgets = list(gadgets)
        self.parent = {}

    def _find(self, a):
        p = self.parent
        root = a
        while p.get(root, root) != root:
            root = p[root]
        while p.get(a, a) != a:
            p[a], a = root, p[a]
        return root

    def identify(self, a, b):
        ra, rb = self._find(a), self._find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)

    def build(self):
        """Returns (graph, vertex_of, edge_map, transcript)."""
        order = [(gi, v) for gi, g in enumerate(self.gadgets)
                 for v in range(g.graph.n)]
        roots = {}
        for a in order:
            r = self._find(a)
            if r not in roots:
                roots[r] = len(roots)
        vertex_of = {a: roots[self._find(a)] for a in order}
        graph = WeightedGraph(len(roots))
        edge_map = []
        for gi, g in enumerate(self.gadgets):
            ids = []
            for (u, v, w) in g.graph.edges:
                ids.append(graph.add_edge(vertex_of[(gi, u)],
                                          vertex_of[(gi, v)], w))
            edge_map.append(ids)
        transcript = [[] for _ in range(graph.n)]
        for a in order:
            transcript[vertex_of[a]].append(list(a))
        return graph, vertex_of, edge_map, transcript


def _oriented_side(gadget, side, first_corner):
    """Side vertices ordered away from the named corner."""
    a, b = SIDE_CORNERS[side]
    vs = gadget.side_vertices(side)
    if first_corner == a:
        return vs
    assert first_corner == b
    return list(reversed(vs))


def groupsSeparated(graph, cut, groups):
    """True iff no component of graph minus cut meets two groups."""
    comps = componentsOf(graph, cut)
    comp_of = {}
    for idx, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = idx
    seen = {}
    for gi, group in enumerate(groups):
        for v in group:
            c = comp_of[v]
            if seen.setdefault(c, gi) != gi:
                return False
    return True


# ---------------------------------------------------------------------------
# 4-regular graph tiling
# ---------------------------------------------------------------------------

class TilingInstance:
    """A tiling problem: a labeled 4-regular multigraph plus a pair set
    per vertex.

    Edges are (u, v, side_u, side_v): the side of u's tile and the side
    of v's tile that the edge glues.  Both ends must carry the same side
    label; gluing, say, a U side onto a D side would chain unbreakable
    boundary runs of one tile into the opposite corner of the other.
    Every vertex must use each of U, D, L, R exactly once; a self-loop
    glues a side to itself and uses that side once.
    """

    def __init__(self, delta, k, edges, S):
        self.delta = int(delta)
        self.k = int(k)
        self.edges = [(int(u), int(v), su, sv) for (u, v, su, sv) in edges]
        self.S = [frozenset((int(x), int(y)) for (x, y) in sv) for sv in S]
        self._validate()

    def _validate(self):
        if self.delta < 1:
            raise ValidationError("delta must be at least 1")
        if self.k < 1:
            raise ValidationError("the tiling graph needs a vertex")
        if len(self.S) != self.k:
            raise ValidationError("one pair set per vertex is required")
        used = [{s: 0 for s in SIDES} for _ in range(self.k)]
        for (u, v, su, sv) in self.edges:
            if not (0 <= u < self.k and 0 <= v < self.k):
                raise ValidationError("edge names an unknown vertex")
            if su not in SIDES or sv not in SIDES:
                raise ValidationError("edge sides must be U, D, L or R")
            if su != sv:
                raise ValidationError(
                    "an edge must glue two sides with the same label")
            used[u][su] += 1
            if (u, su) != (v, sv):
                used[v][sv] += 1
        for v, cnt in enumerate(used):
            if any(cnt[s] != 1 for s in SIDES):
                raise ValidationError(
                    f"vertex {v} must use each side exactly once, got {cnt}")
        for v, sv in enumerate(self.S):
            if not sv:
                raise ValidationError(f"empty pair set at vertex {v}")
            for (x, y) in sv:
                if not (1 <= x <= self.delta and 1 <= y <= self.delta):
                    raise ValidationError(
                        f"pair {(x, y)} at vertex {v} outside [delta]^2")

    def to_json(self):
        return {"delta": self.delta, "k": self.k,
                "edges": [list(e) for e in self.edges],
                "S": [sorted(sv) for sv in self.S]}

    @classmethod
    def from_json(cls, data):
        return cls(data["delta"], data["k"], data["edges"], data["S"])


class GluedReduction:
    """A multicut instance assembled from grid gadgets, with the maps
    needed to replay gadget-local cuts on the glued graph."""

    def __init__(self, instance, gadgets, vertex_of, edge_map, transcript,
                 terminals, groups):
        self.instance = instance
        self.gadgets = gadgets
        self.vertex_of = vertex_of
        self.edge_map = edge_map
        self.transcript = transcript
        self.terminals = terminals  # dict name -> output vertex
        self.groups = groups  # list of output vertex lists

    def lift_cut(self, per_gadget_cuts):
        """Global edge ids for a list of gadget-local cut edge lists."""
        out = []
        for gi, cut in enumerate(per_gadget_cuts):
            out.extend(self.edge_map[gi][e] for e in cut)
        return sorted(set(out))

    def to_json(self):
        return {
            "vertices": self.instance.graph.n,
            "edges": self.instance.graph.edge_count(),
            "budget": self.instance.budget,
            "terminals": self.terminals,
            "groups": self.groups,
            "transcript": self.transcript,
        }


def buildTilingInstance(tiling, mode="four-terminal", encoder="repoCell"):
    """Glue one grid gadget per tiling vertex into a multiway-cut
    instance.

    Every edge of the tiling identifies the distinguished side vertices
    of its two tiles position by position.  All tiles' corners with the
    same name are merged into one terminal; three-terminal mode further
    merges UR with DL.  The budget is the sum of the per-gadget good-cut
    optima, so a cut within budget must induce an optimal good cut on
    every tile.
    """
    if mode not in ("four-terminal", "three-terminal"):
        raise ValidationError(f"unknown mode {mode!r}")
    gadgets = [buildGridGadget(tiling.delta, sv, encoder=encoder)
               for sv in tiling.S]
    union = _GadgetUnion(gadgets)
    for (u, v, su, sv) in tiling.edges:
        left = gadgets[u].side_vertices(su)
        right = gadgets[v].side_vertices(sv)
        for a, b in zip(left, right):
            union.identify((u, a), (v, b))
    for name in ("UL", "UR", "DL", "DR"):
        base = (0, gadgets[0].corners()[name])
        for gi in range(1, len(gadgets)):
            union.identify(base, (gi, gadgets[gi].corners()[name]))
    if mode == "three-terminal":
        union.identify((0, gadgets[0].UR), (0, gadgets[0].DL))
    graph, vertex_of, edge_map, transcript = union.build()
    terminals = {name: vertex_of[(0, gadgets[0].corners()[name])]
                 for name in ("UL", "UR", "DL", "DR")}
    distinct = sorted(set(terminals.values()))
    demands = [(a, b) for a, b in itertools.combinations(distinct, 2)]
    budget = sum(_cached_wstar(g) for g in gadgets)
    instance = MulticutInstance(graph, DemandPattern(distinct, demands),
                                budget, None)
    groups = [[t] for t in distinct]
    return GluedReduction(instance, gadgets, vertex_of, edge_map,
                          transcript, terminals, groups)


# ---------------------------------------------------------------------------
# binary CSP on a 4-regular graph, reduced to a three-group cut
# ---------------------------------------------------------------------------

class CspInstance:
    """A binary CSP whose primal graph is 4-regular and embedded.

    Variables are 0..n-1 over the domain [delta].  Edges are (u, v)
    pairs (loops and parallels allowed); relations[e] is the allowed set
    of (value at u, value at v) pairs.  The rotation lists, per vertex,
    its four incident edge ids in embedding order, loops twice.
    """

    def __init__(self, delta, n, edges, rotation, relations):
        self.delta = int(delta)
        self.n = int(n)
        self.edges = [(int(u), int(v)) for (u, v) in edges]
        self.rotation = [list(r) for r in rotation]
        self.relations = [frozenset((int(a), int(b)) for (a, b) in rel)
                          for rel in relations]
        self._validate()

    def _validate(self):
        if self.delta < 1:
            raise ValidationError("delta must be at least 1")
        if len(self.rotation) != self.n:
            raise ValidationError("rotation must list every variable")
        if len(self.relations) != len(self.edges):
            raise ValidationError("one relation per edge is required")
        count = [0] * len(self.edges)
        for v, rot in enumerate(self.rotation):
            if len(rot) != 4:
                raise ValidationError(f"variable {v} must have degree 4")
            for e in rot:
                if not (0 <= e < len(self.edges)):
                    raise ValidationError(f"rotation names unknown edge {e}")
                (a, b) = self.edges[e]
                if v not in (a, b):
                    raise ValidationError(
                        f"edge {e} listed at non-incident variable {v}")
                count[e] += 1
        if any(c != 2 for c in count):
            raise ValidationError("every edge must appear at exactly two "
                                  "rotation slots")
        for e, rel in enumerate(self.relations):
            if not rel:
                raise ValidationError(f"empty relation at edge {e}")
            for (a, b) in rel:
                if not (1 <= a <= self.delta and 1 <= b <= self.delta):
                    raise ValidationError(
                        f"value pair {(a, b)} at edge {e} outside the domain")

    def satisfying_assignments(self):
        """All satisfying maps as tuples, by exhaustion (small n only)."""
        for vals in itertools.product(range(1, self.delta + 1),
                                      repeat=self.n):
            if all((vals[u], vals[v]) in rel
                   for (u, v), rel in zip(self.edges, self.relations)):
                yield vals

    def to_json(self):
        return {"delta": self.delta, "n": self.n,
                "edges": [list(e) for e in self.edges],
                "rotation": self.rotation,
                "relations": [sorted(r) for r in self.relations]}

    @classmethod
    def from_json(cls, data):
        return cls(data["delta"], data["n"], data["edges"],
                   data["rotation"], data["relations"])


def _csp_scaffold(csp):
    """The quad graph of the CSP: names, cycles and incidence records.

    Per variable v a 4-cycle of x-vertices, per edge e a 4-cycle of
    y-vertices, and per incidence of e at a rotation slot i of v a
    bridging 4-cycle through two fresh x-y edges.  Cycles are returned
    in a fixed order with their vertex names listed cyclically.
    """
    cycles = []
    kinds = []
    for v in range(csp.n):
        cycles.append([("x", v, i) for i in range(1, 5)])
        kinds.append(("var", v))
    for e in range(len(csp.edges)):
        cycles.append([("y", e, j) for j in range(1, 5)])
        kinds.append(("edge", e))
    incidences = {}  # edge -> [(v, i, j)] with j = 1 for the first slot
    for v in range(csp.n):
        for idx, e in enumerate(csp.rotation[v]):
            i = idx + 1
            j = len(incidences.setdefault(e, [])) + 1
            assert j <= 2
            incidences[e].append((v, i, j))
            ip = i % 4 + 1
            jp = j + 1
            cycles.append([("x", v, ip), ("x", v, i),
                           ("y", e, j), ("y", e, jp)])
            kinds.append(("incidence", v, i, e, j))
    return cycles, kinds, incidences


def _scaffold_coloring(csp, cycles, incidences):
    """A proper 3-coloring of the quad graph with all three colors on
    every cycle.  x-vertices get the fixed pattern 1,2,1,3; y-vertices
    are colored around each edge cycle by case analysis."""
    phi = {}
    for v in range(csp.n):
        phi[("x", v, 1)] = 1
        phi[("x", v, 2)] = 2
        phi[("x", v, 3)] = 1
        phi[("x", v, 4)] = 3
    for e in range(len(csp.edges)):
        (va, ia, _), (vb, ib, _) = incidences[e]
        x1 = phi[("x", va, ia)]
        x2 = phi[("x", va, ia % 4 + 1)]
        x3 = phi[("x", vb, ib)]
        x4 = phi[("x", vb, ib % 4 + 1)]
        y2 = min({1, 2, 3} - {x2, x3})
        y1 = ({1, 2, 3} - {x1, x2}).pop() if x1 == y2 else x2
        y3 = ({1, 2, 3} - {x3, x4}).pop() if x4 == y2 else x3
        y4 = ({1, 2, 3} - {y1, y2}).pop() if y1 == y3 else y2
        phi[("y", e, 1)] = y1
        phi[("y", e, 2)] = y2
        phi[("y", e, 3)] = y3
        phi[("y", e, 4)] = y4
    for cyc in cycles:
        cols = [phi[q] for q in cyc]
        assert sorted(set(cols)) == [1, 2, 3], (cyc, cols)
        for a, b in zip(cols, cols[1:] + cols[:1]):
            assert a != b, (cyc, cols)
    return phi


def _corner_correspondence(cycle, phi):
    """Map each cycle vertex to a gadget corner name.

    The unique same-colored (hence nonadjacent) pair becomes DL and UR,
    the smaller name becoming DL, and the listed cyclic order is read as
    clockwise DL, UL, UR, DR.
    """
    cols = [phi[q] for q in cycle]
    if cols[0] == cols[2]:
        p = 0 if cycle[0] < cycle[2] else 2
    else:
        assert cols[1] == cols[3]
        p = 1 if cycle[1] < cycle[3] else 3
    names = ("DL", "UL", "UR", "DR")
    return {cycle[(p + off) % 4]: names[off] for off in range(4)}


_CORNER_PAIR_SIDE = {frozenset(v): k for k, v in SIDE_CORNERS.items()}


def _shared_side(corner_of, qa, qb):
    """The gadget side running between the corners assigned to two
    adjacent cycle vertices."""
    return _CORNER_PAIR_SIDE[frozenset((corner_of[qa], corner_of[qb]))]


def _tau(delta, flip):
    if flip:
        return lambda i: delta + 1 - i
    return lambda i: i


def buildGroup3TCInstance(csp, encoder="repoCell"):
    """Reduce the CSP to a three-group terminal cut via glued gadgets.

    One gadget per quad-graph cycle: identity pairs on variable cycles,
    all pairs on bridging cycles, and the orientation-corrected relation
    on edge cycles.  Gadget corners landing on the same quad vertex are
    merged, sides sharing a quad edge are identified position by
    position, the color classes become the three terminal groups, and
    the budget is the sum of the per-gadget good-cut optima.
    """
    cycles, kinds, incidences = _csp_scaffold(csp)
    phi = _scaffold_coloring(csp, cycles, incidences)
    corner_of = [_corner_correspondence(cyc, phi) for cyc in cycles]
    cycle_of_var = {v: ci for ci, k in enumerate(kinds) if k[0] == "var"
                    for v in [k[1]]}
    cycle_of_edge = {e: ci for ci, k in enumerate(kinds) if k[0] == "edge"
                     for e in [k[1]]}
    cycle_of_inc = {(k[1], k[2]): ci for ci, k in enumerate(kinds)
                    if k[0] == "incidence"}

    full = frozenset((a, b)
                     for a in range(1, csp.delta + 1)
                     for b in range(1, csp.delta + 1))
    part_UR = {"U", "R"}

    def endpoint_flip(e, rec):
        """Whether the side labeling is mirrored between the variable
        cycle of this endpoint and the edge cycle, through the bridge."""
        (v, i, j) = rec
        bridge = cycle_of_inc[(v, i)]
        var_ci = cycle_of_var[v]
        edge_ci = cycle_of_edge[e]
        ip = i % 4 + 1
        side_var = _shared_side(corner_of[var_ci], ("x", v, i), ("x", v, ip))
        side_edge = _shared_side(corner_of[edge_ci],
                                 ("y", e, j), ("y", e, j + 1))
        assert bridge is not None
        return (side_var in part_UR) == (side_edge in part_UR), side_edge

    sets = []
    for ci, kind in enumerate(kinds):
        if kind[0] == "var":
            sets.append(frozenset((a, a) for a in range(1, csp.delta + 1)))
        elif kind[0] == "incidence":
            sets.append(full)
        else:
            e = kind[1]
            rec_u, rec_v = incidences[e]
            flip_u, side_u = endpoint_flip(e, rec_u)
            flip_v, _ = endpoint_flip(e, rec_v)
            tu, tv = _tau(csp.delta, flip_u), _tau(csp.delta, flip_v)
            rel = csp.relations[e]
            if side_u in ("L", "R"):
                sets.append(frozenset((tu(a), tv(b)) for (a, b) in rel))
            else:
                sets.append(frozenset((tv(b), tu(a)) for (a, b) in rel))

    gadgets = [buildGridGadget(csp.delta, s, encoder=encoder) for s in sets]
    union = _GadgetUnion(gadgets)

    occurrences = {}  # quad vertex -> [(cycle, corner vid)]
    qedges = {}  # quad edge -> [(cycle, name pair in cycle order)]
    for ci, cyc in enumerate(cycles):
        g = gadgets[ci]
        for q in cyc:
            occurrences.setdefault(q, []).append(
                (ci, g.corners()[corner_of[ci][q]]))
        for qa, qb in zip(cyc, cyc[1:] + cyc[:1]):
            qedges.setdefault(frozenset((qa, qb)), []).append((ci, (qa, qb)))

    for occ in occurrences.values():
        for other in occ[1:]:
            union.identify(occ[0], other)
    for key, occ in qedges.items():
        assert len(occ) <= 2, key
        if len(occ) < 2:
            continue
        qa, qb = sorted(key)
        rows = []
        for (ci, _) in occ:
            side = _shared_side(corner_of[ci], qa, qb)
            rows.append((ci, _oriented_side(gadgets[ci], side,
                                            corner_of[ci][qa])))
        (ca, va), (cb, vb) = rows
        for a, b in zip(va, vb):
            union.identify((ca, a), (cb, b))

    graph, vertex_of, edge_map, transcript = union.build()
    qvertex_id = {q: vertex_of[occ[0]] for q, occ in occurrences.items()}
    groups = [sorted({qvertex_id[q] for q in qvertex_id if phi[q] == c})
              for c in (1, 2, 3)]
    terminals = {str(q): qvertex_id[q] for q in sorted(qvertex_id)}
    all_terms = sorted(set().union(*map(set, groups)))
    demands = sorted({tuple(sorted((a, b)))
                      for ga, gb in itertools.combinations(groups, 2)
                      for a in ga for b in gb})
    budget = sum(_cached_wstar(g) for g in gadgets)
    instance = MulticutInstance(graph, DemandPattern(all_terms, demands),
                                budget, None)
    red = GluedReduction(instance, gadgets, vertex_of, edge_map,
                         transcript, terminals, groups)
    red.cycles = cycles
    red.cycle_kinds = kinds
    red.coloring = phi
    red.pair_sets = sets
    red.corner_of = corner_of
    return red
