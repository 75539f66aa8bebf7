"""Cut graphs, parcels, trails and multicut duals for plane instances.

The geometric machinery is made combinatorial: a cut graph K (a tree on
the terminals) is drawn into the embedding edge by edge, each drawn edge
recorded as a walk through faces that crosses G-edges at explicit
crossing vertices.  The faces of the resulting overlay are the parcels.
Trails through parcels with prescribed crossing sequences are found by a
layered dynamic program, and whole dual graphs are placed by assigning
their vertices to parcels with a tree-decomposition DP.

Multicut duals are also built directly from a cut: triangulate the
embedding with zero-weight chords and cross every cut edge and every
chord once.  Validity (demanded terminals in distinct faces of the dual)
is checked on a corner-region graph of the drawing.
"""

import heapq
import itertools

from .core import (
    INF,
    ValidationError,
    WeightedGraph,
    component_index,
    is_finite,
)
from .embedding import traceFaces


# ---------------------------------------------------------------------------
# dart tracing shared by the overlay and the triangulation
# ---------------------------------------------------------------------------

def _trace_darts(rot):
    """Face orbits of a rotation system given as per-vertex end lists.

    A dart (e, k) traverses edge e starting from end k.  Its face
    continues with the rotation successor of the opposite end.  Returns
    (faces, face_of) where faces is a list of dart lists and face_of
    maps every dart to its face id.
    """
    pos = {}
    for v, ends in enumerate(rot):
        for i, end in enumerate(ends):
            pos[end] = (v, i)

    def next_dart(d):
        e, k = d
        v, i = pos[(e, 1 - k)]
        ends = rot[v]
        return ends[(i + 1) % len(ends)]

    darts = set(pos)
    faces = []
    face_of = {}
    while darts:
        start = min(darts)
        walk = []
        d = start
        while True:
            darts.discard(d)
            face_of[d] = len(faces)
            walk.append(d)
            d = next_dart(d)
            if d == start:
                break
        faces.append(walk)
    return faces, face_of


# ---------------------------------------------------------------------------
# cut graph and parcels
# ---------------------------------------------------------------------------

class DualWalk:
    """One drawn K-edge: terminals linked by a face walk crossing G-edges."""

    def __init__(self, kid, u, v, g_faces, crossed, weight):
        self.id = kid
        self.u = u
        self.v = v
        self.g_faces = list(g_faces)  # faces of G visited, in order
        self.crossed = list(crossed)  # G-edge ids crossed, in order
        self.weight = weight

    def __repr__(self):
        return (f"DualWalk({self.id}, {self.u}-{self.v}, "
                f"crossed={self.crossed}, w={self.weight})")


class CutGraphK:
    def __init__(self, nodes, walks):
        self.nodes = list(nodes)  # terminal vertex ids
        self.walks = list(walks)

    def edge_count(self):
        return len(self.walks)


class Trail:
    """Alternating parcel/edge sequence; edges labeled ("G", id) or ("K", id)."""

    def __init__(self, parcels, edges, weight):
        assert len(parcels) == len(edges) + 1
        self.parcels = list(parcels)
        self.edges = list(edges)
        self.weight = weight

    def crossing_sequence(self):
        return tuple(i for (kind, i) in self.edges if kind == "K")

    def g_edges(self):
        """Multiset (list) of G-edge ids along the trail."""
        return [i for (kind, i) in self.edges if kind == "G"]

    def __repr__(self):
        return f"Trail({self.parcels[0]}->{self.parcels[-1]}, w={self.weight})"


class ParcelGraph:
    """Faces of the overlay of G and K, with labeled adjacencies."""

    def __init__(self, n_parcels, adjacencies, parcel_gface, g_weights,
                 k_edge_ids):
        self.n_parcels = n_parcels
        # (parcel, parcel, kind, parent edge id), deduplicated
        self.adjacencies = sorted(set(adjacencies))
        self.parcel_gface = list(parcel_gface)
        self.g_weights = dict(g_weights)
        self.k_edge_ids = list(k_edge_ids)
        self.g_steps = [[] for _ in range(n_parcels)]
        self.k_steps = [[] for _ in range(n_parcels)]
        for (p, q, kind, parent) in self.adjacencies:
            for (a, b) in ((p, q), (q, p)):
                if kind == "G":
                    step = (b, self.g_weights[parent], parent)
                    if step not in self.g_steps[a]:
                        self.g_steps[a].append(step)
                else:
                    step = (b, parent)
                    if step not in self.k_steps[a]:
                        self.k_steps[a].append(step)
        for steps in self.g_steps:
            steps.sort(key=lambda s: (s[0], s[2]))
        for steps in self.k_steps:
            steps.sort()

    def specialParcels(self, g_faces):
        g_faces = set(g_faces)
        return [p for p in range(self.n_parcels)
                if self.parcel_gface[p] in g_faces]

    def to_json(self):
        return {
            "parcels": self.n_parcels,
            "parcelFace": list(self.parcel_gface),
            "adjacencies": [[p, q, kind, parent]
                            for (p, q, kind, parent) in self.adjacencies],
            "kEdges": list(self.k_edge_ids),
        }


class _Overlay:
    """Mutable overlay of the embedding of G and the K-edges drawn so far.

    Segments subdivide the original edges; each carries its kind and
    parent edge id.  G-segments remember which dart of G each of their
    darts came from, so overlay faces can be mapped back to faces of G.
    """

    def __init__(self, embedding):
        g = embedding.graph
        self.g = g
        self.nv = g.n
        self.segs = []  # (u, v, kind, parent)
        self.gdarts = []  # per segment: (G-dart for dart 0, for dart 1) or None
        self.rot = [[] for _ in range(g.n)]
        for eid, (u, v, _) in enumerate(g.edges):
            self.segs.append((u, v, "G", eid))
            self.gdarts.append(((eid, 0), (eid, 1)))
        for v, ends in enumerate(embedding.rotation):
            self.rot[v] = list(ends)
        g_faces, g_face_of = _trace_darts(
            [list(ends) for ends in embedding.rotation])
        self.g_face_of = g_face_of
        self.n_g_faces = len(g_faces)

    def seg_head(self, dart):
        sid, k = dart
        u, v, _, _ = self.segs[sid]
        return v if k == 0 else u

    def trace(self):
        return _trace_darts(self.rot)

    def gface_of_parcel(self, walk):
        for (sid, k) in walk:
            if self.segs[sid][2] == "G":
                return self.g_face_of[self.gdarts[sid][k]]
        raise AssertionError("overlay face bounded by K-segments only")

    def subdivide(self, sid):
        """Split a segment at a new vertex; returns (vertex, first, second)
        where first holds end 0 of the old segment."""
        u, v, kind, parent = self.segs[sid]
        x = self.nv
        self.nv += 1
        self.rot.append([])
        s1 = len(self.segs)
        self.segs.append((u, x, kind, parent))
        s2 = len(self.segs)
        self.segs.append((x, v, kind, parent))
        gd = self.gdarts[sid]
        self.gdarts.append(gd)
        self.gdarts.append(gd)
        self.rot[u][self.rot[u].index((sid, 0))] = (s1, 0)
        self.rot[v][self.rot[v].index((sid, 1))] = (s2, 1)
        self.rot[x] = [(s1, 1), (s2, 0)]
        return x, s1, s2

    def add_k_segment(self, kid, va, anchor_a, vb, anchor_b):
        """New K-segment from va to vb, each end inserted into the rotation
        right after its anchor end (a corner of the face it is drawn in)."""
        sid = len(self.segs)
        self.segs.append((va, vb, "K", kid))
        self.gdarts.append(None)
        self.rot[va].insert(self.rot[va].index(anchor_a) + 1, (sid, 0))
        self.rot[vb].insert(self.rot[vb].index(anchor_b) + 1, (sid, 1))
        return sid


def _corner_anchor(overlay, walk, vertex, remap):
    """Arrival end of the first corner of the face walk at `vertex`,
    with ends remapped when their segment was subdivided meanwhile."""
    for (sid, k) in walk:
        if overlay.seg_head((sid, k)) == vertex:
            end = (sid, 1 - k)
            return remap.get(end, end)
    raise AssertionError(f"face has no corner at vertex {vertex}")


def buildSetup(embedding, terminals):
    """Cut graph K (a tree on the terminals, drawn greedily by nearest
    attachment) and the parcels of the overlay.

    Each K-edge is a minimum-crossed-weight walk through the faces of
    the current overlay, crossing only G-segments; ties go to the
    lexicographically smallest face-id sequence.  Every (G-edge, K-edge)
    pair crosses at most once.
    """
    g = embedding.graph
    _, genus = traceFaces(embedding)
    if genus != 0:
        raise ValidationError("setups are built for plane embeddings only")
    terminals = sorted(set(terminals))
    for t in terminals:
        if not (0 <= t < g.n):
            raise ValidationError(f"terminal {t} out of range")
    overlay = _Overlay(embedding)
    walks = []
    crossings = 0
    if len(terminals) >= 2:
        attached = {terminals[0]}
        while len(attached) < len(terminals):
            walk = _route_next_terminal(overlay, attached, terminals,
                                        len(walks))
            attached.add(walk.v)
            walks.append(walk)
            crossings += len(walk.crossed)
    faces, face_of = overlay.trace()
    adjacencies = []
    active = 0
    for sid, (u, v, kind, parent) in enumerate(overlay.segs):
        if (sid, 0) not in face_of:
            continue  # replaced by subdivision
        active += 1
        p, q = face_of[(sid, 0)], face_of[(sid, 1)]
        adjacencies.append((min(p, q), max(p, q), kind, parent))
    assert overlay.nv - active + len(faces) == 2  # the overlay stays plane
    parcel_gface = [overlay.gface_of_parcel(w) for w in faces]
    g_weights = {eid: g.weight(eid) for eid in range(g.edge_count())}
    pg = ParcelGraph(len(faces), adjacencies, parcel_gface, g_weights,
                     [w.id for w in walks])
    K = CutGraphK(terminals, walks)
    # every (G-edge, K-edge) pair crosses at most once
    pairs = set()
    for w in walks:
        for e in w.crossed:
            assert (e, w.id) not in pairs
            pairs.add((e, w.id))
    assert pg.n_parcels <= overlay.n_g_faces + crossings + len(walks)
    return K, pg


def _route_next_terminal(overlay, attached, terminals, kid):
    """Min-crossed-weight walk from the attached part of K to the nearest
    unattached terminal, drawn into the overlay."""
    faces, face_of = overlay.trace()
    vertex_faces = [set() for _ in range(overlay.nv)]
    for fid, walk in enumerate(faces):
        for d in walk:
            vertex_faces[overlay.seg_head(d)].add(fid)
    unattached = [t for t in terminals if t not in attached]
    # state: (cost, face-id path, crossed G-edge set, crossing darts)
    heap = []
    start_anchor = {}
    for t in sorted(attached):
        for fid in sorted(vertex_faces[t]):
            if fid not in start_anchor:
                start_anchor[fid] = t
    for fid, t in sorted(start_anchor.items()):
        heapq.heappush(heap, (0, (fid,), frozenset(), ()))
    seen = set()
    found = None
    while heap:
        cost, path, crossed, steps = heapq.heappop(heap)
        fid = path[-1]
        key = (fid, crossed)
        if key in seen:
            continue
        seen.add(key)
        goal = [t for t in unattached if fid in vertex_faces[t]]
        if goal:
            found = (cost, path, steps, min(goal))
            break
        for d in faces[fid]:
            sid, k = d
            u, v, kind, parent = overlay.segs[sid]
            if kind != "G" or parent in crossed:
                continue
            other = face_of[(sid, 1 - k)]
            if other == fid or other in path:
                continue
            w = overlay.g.weight(parent)
            if not is_finite(w):
                continue
            heapq.heappush(heap, (cost + w, path + (other,),
                                  crossed | {parent}, steps + (d,)))
    if found is None:
        raise ValidationError("cut graph construction failed to reach "
                              "every terminal")
    cost, path, steps, t_new = found
    t_old = start_anchor[path[0]]
    g_faces = [overlay.gface_of_parcel(faces[f]) for f in path]
    crossed_order = [overlay.segs[d[0]][3] for d in steps]

    # draw the walk: subdivide each crossed segment, then insert the
    # K-segments corner by corner
    remap = {}
    xinfo = []  # per crossing: (vertex, anchor on the earlier face side,
    #             anchor on the later face side)
    for d in steps:
        sid, k = d
        x, s1, s2 = overlay.subdivide(sid)
        remap[(sid, 0)] = (s1, 0)
        remap[(sid, 1)] = (s2, 1)
        if k == 0:
            xinfo.append((x, (s1, 1), (s2, 0)))
        else:
            xinfo.append((x, (s2, 0), (s1, 1)))
    anchor_a = _corner_anchor(overlay, faces[path[0]], t_old, remap)
    anchor_b = _corner_anchor(overlay, faces[path[-1]], t_new, remap)
    points = [(t_old, anchor_a)]
    for (x, a_in, a_out) in xinfo:
        points.append((x, a_in))
        points.append((x, a_out))
    points.append((t_new, anchor_b))
    for i in range(0, len(points), 2):
        (va, aa), (vb, ab) = points[i], points[i + 1]
        overlay.add_k_segment(kid, va, aa, vb, ab)
    return DualWalk(kid, t_old, t_new, g_faces, crossed_order, cost)


# ---------------------------------------------------------------------------
# trails
# ---------------------------------------------------------------------------

def _trail_dp(pg, p1, sigma):
    """Layered trail DP: z[j][i][p] is the minimum weight of a trail
    from p1 to p with crossing sequence sigma[:i] and length at most j.

    Each layer takes a three-way minimum per state: stay at the previous
    length, step across a G-edge, or cross the next K-edge of sigma.
    Returns (layers, pred) where pred[(j, i, p)] records the step that
    improved the state at layer j, for reconstruction.
    """
    P = pg.n_parcels
    gamma = len(sigma)
    jmax = (gamma + 1) * P
    first = [[INF] * P for _ in range(gamma + 1)]
    first[0][p1] = 0
    layers = [first]
    pred = {}
    for j in range(1, jmax + 1):
        prev = layers[-1]
        cur = [row[:] for row in prev]
        changed = False
        for i in range(gamma + 1):
            for p in range(P):
                best = prev[i][p]
                arg = None
                for (q, w, gid) in pg.g_steps[p]:
                    cand = prev[i][q] + w
                    if cand < best:
                        best = cand
                        arg = (i, q, ("G", gid))
                if i >= 1:
                    kid = sigma[i - 1]
                    for (q, k) in pg.k_steps[p]:
                        if k == kid and prev[i - 1][q] < best:
                            best = prev[i - 1][q]
                            arg = (i - 1, q, ("K", kid))
                if arg is not None:
                    cur[i][p] = best
                    pred[(j, i, p)] = arg
                    changed = True
        if not changed:
            break
        layers.append(cur)
    return layers, pred


def _reconstruct_trail(layers, pred, p1, p2, sigma):
    weight = layers[-1][len(sigma)][p2]
    if not is_finite(weight):
        return None
    parcels = [p2]
    edges = []
    j, i, p = len(layers) - 1, len(sigma), p2
    while j > 0:
        if (j, i, p) in pred:
            i, p, label = pred[(j, i, p)]
            edges.append(label)
            parcels.append(p)
        j -= 1
    assert (i, p) == (0, p1)
    parcels.reverse()
    edges.reverse()
    return Trail(parcels, edges, weight)


def minTrail(pg, p1, p2, sigma):
    """Minimum-weight trail from parcel p1 to p2 whose crossing sequence
    is exactly sigma (a sequence of K-edge ids), or None."""
    sigma = tuple(sigma)
    layers, pred = _trail_dp(pg, p1, sigma)
    return _reconstruct_trail(layers, pred, p1, p2, sigma)


class TrailOracle:
    """Caches the trail DP per (start parcel, crossing sequence), so that
    costs and trails for many endpoint pairs share one computation."""

    def __init__(self, pg):
        self.pg = pg
        self._dp = {}

    def _get(self, p1, sigma):
        key = (p1, sigma)
        if key not in self._dp:
            self._dp[key] = _trail_dp(self.pg, p1, sigma)
        return self._dp[key]

    def cost_row(self, p1, sigma):
        sigma = tuple(sigma)
        layers, _ = self._get(p1, sigma)
        return layers[-1][len(sigma)]

    def cost(self, p1, p2, sigma):
        return self.cost_row(p1, sigma)[p2]

    def trail(self, p1, p2, sigma):
        sigma = tuple(sigma)
        layers, pred = self._get(p1, sigma)
        return _reconstruct_trail(layers, pred, p1, p2, sigma)


def _trail_cost_row(pg, p1, sigma):
    layers, _ = _trail_dp(pg, p1, sigma)
    return layers[-1][len(sigma)]


# ---------------------------------------------------------------------------
# discretized dual embeddings
# ---------------------------------------------------------------------------

class DiscretizedDual:
    """A dual topology placed into parcels: orientation, vertex placement
    phi, and one trail per arc realizing its planned crossing sequence."""

    def __init__(self, pg, C, orientation, X, psi, Gamma, phi, trails,
                 trail_weight):
        self.parcel_graph = pg
        self.topology = C
        self.orientation = list(orientation)
        self.X = set(X)
        self.psi = dict(psi)
        self.Gamma = [tuple(s) for s in Gamma]
        self.phi = dict(phi)
        self.trails = dict(trails)
        self.trail_weight = trail_weight
        for eid, trail in self.trails.items():
            assert trail.crossing_sequence() == self.Gamma[eid]


def edgesCrossed(dd):
    """G-edges crossed by any trail of the dual, with their total weight
    counted once per edge."""
    pg = dd.parcel_graph
    crossed = set()
    for trail in dd.trails.values():
        crossed.update(trail.g_edges())
    weight = 0
    for e in sorted(crossed):
        weight = weight + pg.g_weights[e]
    return sorted(crossed), weight


def _arc(C, orientation, eid):
    u, v, _ = C.edges[eid]
    return (u, v) if orientation[eid] == 0 else (v, u)


def solveDiscretizedEmbedding(pg, C, orientation, X, psi, Gamma,
                              decomposition=None):
    """Minimum-weight placement of the dual topology C into parcels.

    Vertices in X are pinned by psi; the rest are assigned by a DP over
    the given tree decomposition of C minus X.  Arc costs are trail
    costs for the planned crossing sequences; costs touching X are
    folded into unary terms and a constant, playing the role of the two
    auxiliary variables.  Returns a DiscretizedDual or None.
    """
    X = set(X)
    for v in X:
        if v not in psi:
            raise ValidationError(f"pinned vertex {v} missing from psi")
    free = [v for v in range(C.n) if v not in X]
    P = pg.n_parcels
    tables = {}

    def cost(p1, p2, sigma):
        key = (p1, tuple(sigma))
        if key not in tables:
            tables[key] = _trail_cost_row(pg, p1, tuple(sigma))
        return tables[key][p2]

    const = 0
    unary = {v: [0] * P for v in free}
    binary = []
    for eid in range(C.edge_count()):
        tail, head = _arc(C, orientation, eid)
        sigma = tuple(Gamma[eid])
        if tail in X and head in X:
            c = cost(psi[tail], psi[head], sigma)
            if not is_finite(c):
                return None
            const = const + c
        elif tail in X:
            row = unary[head]
            for p in range(P):
                row[p] = row[p] + cost(psi[tail], p, sigma)
        elif head in X:
            row = unary[tail]
            for p in range(P):
                row[p] = row[p] + cost(p, psi[head], sigma)
        elif tail == head:
            row = unary[tail]
            for p in range(P):
                row[p] = row[p] + cost(p, p, sigma)
        else:
            binary.append((tail, head, sigma))

    phi = dict(psi)
    if not free:
        total = const
    else:
        assignment, value = _vcsp_tree_dp(free, unary, binary, P,
                                          decomposition, cost)
        if assignment is None:
            return None
        phi.update(assignment)
        total = value + const
    if not is_finite(total):
        return None
    trails = {}
    for eid in range(C.edge_count()):
        tail, head = _arc(C, orientation, eid)
        trail = minTrail(pg, phi[tail], phi[head], Gamma[eid])
        assert trail is not None
        trails[eid] = trail
    return DiscretizedDual(pg, C, orientation, X, psi, Gamma, phi, trails,
                           total)


def _vcsp_tree_dp(free, unary, binary, P, decomposition, cost):
    """Minimize sum of unary and binary costs over assignments of the
    free variables to parcels, by DP over a tree decomposition whose
    vertex set is exactly the free variables.

    `cost(p1, p2, sigma)` gives the trail cost backing each binary term.
    Returns (assignment dict, value) or (None, None) if infeasible.
    Ties between optimal assignments break on the sorted item tuple.
    """
    if decomposition is None:
        bags = [frozenset(free)]
        tree_edges = []
    else:
        bags = [frozenset(b) for b in decomposition.bags]
        tree_edges = list(decomposition.tree_edges)
    covered = set()
    for b in bags:
        covered |= b
    if covered != set(free):
        raise ValidationError("decomposition must cover the unpinned "
                              "dual vertices")
    own_vertex = {}
    for v in free:
        own_vertex[v] = min(i for i, b in enumerate(bags) if v in b)
    own_binary = [[] for _ in bags]
    for (u, v, sigma) in binary:
        home = [i for i, b in enumerate(bags) if u in b and v in b]
        if not home:
            raise ValidationError("decomposition misses a dual arc")
        own_binary[min(home)].append((u, v, sigma))
    parent = [None] * len(bags)
    children = [[] for _ in bags]
    adj = [[] for _ in bags]
    for (a, b) in tree_edges:
        adj[a].append(b)
        adj[b].append(a)
    order = [0]
    seen = {0}
    for i in order:
        for j in adj[i]:
            if j not in seen:
                seen.add(j)
                parent[j] = i
                children[i].append(j)
                order.append(j)
    if len(seen) != len(bags):
        raise ValidationError("decomposition tree is disconnected")

    tables = {}
    for i in reversed(order):
        bag = sorted(bags[i])
        sep = None if parent[i] is None else sorted(bags[i] & bags[parent[i]])
        result = {}
        for combo in itertools.product(range(P), repeat=len(bag)):
            assign = dict(zip(bag, combo))
            value = 0
            for v in bag:
                if own_vertex[v] == i:
                    value = value + unary[v][assign[v]]
            for (u, v, sigma) in own_binary[i]:
                value = value + cost(assign[u], assign[v], sigma)
            if not is_finite(value):
                continue
            full = dict(assign)
            ok = True
            for j in children[i]:
                key = tuple(assign[v] for v in sorted(bags[i] & bags[j]))
                entry = tables[j].get(key)
                if entry is None:
                    ok = False
                    break
                value = value + entry[0]
                full.update(entry[1])
            if not ok or not is_finite(value):
                continue
            key = None if sep is None else tuple(assign[v] for v in sep)
            item = (value, tuple(sorted(full.items())))
            if key not in result or item < result[key]:
                result[key] = item
        tables[i] = {k: (v, dict(items)) for k, (v, items) in result.items()}
    root = tables[order[0]]
    if None not in root:
        return None, None
    value, assignment = root[None]
    return assignment, value


# ---------------------------------------------------------------------------
# multicut duals from cuts
# ---------------------------------------------------------------------------

class DualDescription:
    """A multicut dual drawn on a chord-triangulated copy of G.

    `graph` is G plus the zero-weight chords; `crossed` lists the edges
    of the triangulation crossed exactly once by the dual.  The dual
    itself has one vertex per face of the triangulation and one edge per
    crossed primal edge.
    """

    def __init__(self, graph, rot, original_edge_count, added_edges, crossed):
        self.graph = graph
        self.rot = [list(r) for r in rot]
        self.original_edge_count = original_edge_count
        self.added_edges = list(added_edges)
        self.crossed = sorted(crossed)
        self.faces, self.face_of = _trace_darts(self.rot)
        self.dual = WeightedGraph(len(self.faces))
        self.dual_to_primal = []
        for e in self.crossed:
            f1 = self.face_of[(e, 0)]
            f2 = self.face_of[(e, 1)]
            self.dual.add_edge(f1, f2, graph.weight(e))
            self.dual_to_primal.append(e)

    def e_G(self):
        """G-edges crossed by the dual (chords excluded)."""
        return [e for e in self.crossed if e < self.original_edge_count]

    def regions(self):
        """Vertex sets of the faces of the dual drawing, computed on the
        corner-region graph: corners of a face strip connect unless the
        edge alongside is crossed, and every corner touches its vertex."""
        n = self.graph.n
        extra = {}
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

        def corner(fid, i):
            key = (fid, i)
            if key not in extra:
                extra[key] = len(parent)
                parent.append(len(parent))
            return extra[key]

        crossed = set(self.crossed)
        ends = {}
        for eid, (u, v, _) in enumerate(self.graph.edges):
            ends[(eid, 0)] = u
            ends[(eid, 1)] = v
        for fid, walk in enumerate(self.faces):
            m = len(walk)
            for i, (e, k) in enumerate(walk):
                head = ends[(e, 1 - k)]
                union(corner(fid, i), head)
                nxt = walk[(i + 1) % m]
                if nxt[0] not in crossed:
                    union(corner(fid, i), corner(fid, (i + 1) % m))
        groups = {}
        for v in range(n):
            groups.setdefault(find(v), []).append(v)
        return sorted(groups.values())

    def separates(self, demand_edges):
        idx = {}
        for i, reg in enumerate(self.regions()):
            for v in reg:
                idx[v] = i
        return all(idx[a] != idx[b] for (a, b) in demand_edges)

    def to_json(self):
        return {
            "addedEdges": list(self.added_edges),
            "crossed": list(self.crossed),
            "eG": self.e_G(),
            "primalFaces": len(self.faces),
            "dualFaces": len(self.regions()),
        }


def _triangulate(embedding):
    """Chord the faces of a connected plane embedding until every face
    walk has at most three darts.  Chords get weight zero.  Returns
    (graph, rotation ends, added edge ids)."""
    graph = embedding.graph.copy()
    rot = [list(r) for r in embedding.rotation]
    added = []
    while True:
        faces, _ = _trace_darts(rot)
        target = None
        for fid, walk in enumerate(faces):
            if len(walk) > 3:
                target = walk
                break
        if target is None:
            break
        ends = {}
        for eid, (u, v, _) in enumerate(graph.edges):
            ends[(eid, 0)] = u
            ends[(eid, 1)] = v
        d0, d2 = target[0], target[2]
        u0 = ends[(d0[0], 1 - d0[1])]
        u2 = ends[(d2[0], 1 - d2[1])]
        chord = graph.add_edge(u0, u2, 0)
        added.append(chord)
        a0 = (d0[0], 1 - d0[1])
        a2 = (d2[0], 1 - d2[1])
        rot[u0].insert(rot[u0].index(a0) + 1, (chord, 0))
        rot[u2].insert(rot[u2].index(a2) + 1, (chord, 1))
    return graph, rot, added


def dualFromMulticut(embedding, pattern, S):
    """Multicut dual for the cut S: triangulate with zero-weight chords
    and cross every edge of S and every chord once.

    Refuses if S is not a multicut for the demands.  The returned
    description satisfies e_G(C) = S and keeps every demanded pair in
    distinct faces of the dual drawing.
    """
    g = embedding.graph
    S = sorted(set(S))
    idx = component_index(g, S)
    if not all(idx[a] != idx[b] for (a, b) in pattern.demand_edges):
        raise ValidationError("S is not a multicut for the demands")
    graph, rot, added = _triangulate(embedding)
    crossed = sorted(set(S) | set(added))
    dd = DualDescription(graph, rot, g.edge_count(), added, crossed)
    assert dd.e_G() == S
    assert dd.separates(pattern.demand_edges)
    return dd


def minimizeDual(dual, pattern):
    """Remove crossed edges (ascending id, repeated to a fixed point)
    while every demanded pair stays separated.  In the result every dual
    face contains a terminal and the face count is at most t."""
    demands = pattern.demand_edges
    crossed = list(dual.crossed)
    changed = True
    while changed:
        changed = False
        for e in sorted(crossed):
            trial = [x for x in crossed if x != e]
            cand = DualDescription(dual.graph, dual.rot,
                                   dual.original_edge_count,
                                   dual.added_edges, trial)
            if cand.separates(demands):
                crossed = trial
                changed = True
    out = DualDescription(dual.graph, dual.rot, dual.original_edge_count,
                          dual.added_edges, crossed)
    if demands:
        regions = out.regions()
        terms = set(pattern.terminals)
        assert all(terms & set(reg) for reg in regions)
        assert len(regions) <= len(pattern.terminals)
    return out
