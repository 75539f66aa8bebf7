"""Combinatorial cellular embeddings: rotation systems, face tracing,
Euler genus, dual graphs and face covers.

An embedding is a rotation system: for every vertex, a cyclic order of
its incident edge-ends.  An edge-end is (edge id, end index); a loop
contributes both ends to the same vertex.  Faces are the orbits of the
next-dart permutation, where the dart leaving via an end continues with
the rotation successor of the edge's other end.
"""

import itertools
from collections import deque

from .core import ValidationError, WeightedGraph


class Face:
    def __init__(self, fid, walk):
        self.id = fid
        self.walk = walk  # list of (vertex, edge id) incidences

    def vertices(self):
        return {v for (v, _) in self.walk}

    def edge_ids(self):
        return [e for (_, e) in self.walk]

    def __repr__(self):
        return f"Face({self.id}, len={len(self.walk)})"


class RotationEmbedding:
    def __init__(self, graph, rotation):
        """rotation: per vertex, list of (edge id, end index) in cyclic
        order.  Use from_edge_lists for the JSON form (plain edge ids,
        loops listed twice)."""
        self.graph = graph
        self.rotation = [list(r) for r in rotation]
        self._validate()

    @classmethod
    def from_edge_lists(cls, graph, lists):
        if len(lists) != graph.n:
            raise ValidationError("rotation must list every vertex")
        rotation = []
        for v, ids in enumerate(lists):
            seen_loop = set()
            ends = []
            for eid in ids:
                if not (0 <= eid < graph.edge_count()):
                    raise ValidationError(f"rotation names unknown edge {eid}")
                a, b = graph.endpoints(eid)
                if a == b:
                    if a != v:
                        raise ValidationError(
                            f"loop {eid} listed at non-incident vertex {v}")
                    end = 1 if eid in seen_loop else 0
                    seen_loop.add(eid)
                elif a == v:
                    end = 0
                elif b == v:
                    end = 1
                else:
                    raise ValidationError(
                        f"edge {eid} listed at non-incident vertex {v}")
                ends.append((eid, end))
            rotation.append(ends)
        return cls(graph, rotation)

    def to_edge_lists(self):
        return [[e for (e, _) in r] for r in self.rotation]

    def _validate(self):
        g = self.graph
        if len(self.rotation) != g.n:
            raise ValidationError("rotation must list every vertex")
        expected = {}
        for eid, (a, b) in enumerate((e[0], e[1]) for e in g.edges):
            expected[(eid, 0)] = a
            expected[(eid, 1)] = b
        seen = set()
        for v, ends in enumerate(self.rotation):
            for end in ends:
                if end not in expected:
                    raise ValidationError(f"unknown edge-end {end}")
                if expected[end] != v:
                    raise ValidationError(
                        f"edge-end {end} listed at wrong vertex {v}")
                if end in seen:
                    raise ValidationError(f"edge-end {end} listed twice")
                seen.add(end)
        if len(seen) != 2 * g.edge_count():
            raise ValidationError("some edge-end missing from the rotation")
        self._end_pos = {}
        for v, ends in enumerate(self.rotation):
            for i, end in enumerate(ends):
                self._end_pos[end] = (v, i)

    def end_vertex(self, end):
        return self._end_pos[end][0]

    def next_dart(self, end):
        """Dart = departing edge-end; successor continues the face walk."""
        eid, k = end
        other = (eid, 1 - k)
        v, i = self._end_pos[other]
        ends = self.rotation[v]
        return ends[(i + 1) % len(ends)]


def traceFaces(embedding):
    """Faces and Euler genus of a connected embedded graph.

    Returns (faces, genus); genus = 2 - V + E - F must be >= 0.
    """
    g = embedding.graph
    comps = _vertex_components(g)
    if len(comps) > 1:
        raise ValidationError("face tracing requires a connected graph")
    if g.edge_count() == 0:
        faces = [Face(0, [])]
        genus = 2 - g.n + 0 - 1
        if genus != 0:
            raise ValidationError("edgeless graph with more than one vertex")
        return faces, 0
    darts = {(e, k) for e in range(g.edge_count()) for k in (0, 1)}
    faces = []
    while darts:
        start = min(darts)
        walk = []
        d = start
        while True:
            darts.discard(d)
            walk.append((embedding.end_vertex(d), d[0]))
            d = embedding.next_dart(d)
            if d == start:
                break
        faces.append(Face(len(faces), walk))
    genus = 2 - g.n + g.edge_count() - len(faces)
    if genus < 0:
        raise ValidationError("face count inconsistent with Euler's formula")
    return faces, genus


def _vertex_components(g):
    adj = g.adjacency()
    seen = [False] * g.n
    comps = []
    for s in range(g.n):
        if seen[s]:
            continue
        comp = []
        q = deque([s])
        seen[s] = True
        while q:
            v = q.popleft()
            comp.append(v)
            for (u, _) in adj[v]:
                if not seen[u]:
                    seen[u] = True
                    q.append(u)
        comps.append(comp)
    return comps


def dualGraph(embedding):
    """Graph on the faces; edge i of the dual crosses edge i of the primal
    and carries its weight."""
    faces, _ = traceFaces(embedding)
    side = {}
    for f in faces:
        for (_, e) in f.walk:
            side.setdefault(e, []).append(f.id)
    dual = WeightedGraph(len(faces))
    for eid in range(embedding.graph.edge_count()):
        fs = side[eid]
        assert len(fs) == 2
        dual.add_edge(fs[0], fs[1], embedding.graph.weight(eid))
    return dual


def validatePlane(embedding):
    """(ok, report): ok iff every connected component has genus 0."""
    g = embedding.graph
    genera = []
    for comp in _vertex_components(g):
        cset = set(comp)
        sub, sub_rot = _induced_embedding(embedding, cset)
        if sub.edge_count() == 0 and sub.n == 1:
            genera.append(0)
            continue
        _, genus = traceFaces(RotationEmbedding(sub, sub_rot))
        genera.append(genus)
    ok = all(x == 0 for x in genera)
    return ok, {"componentGenera": genera, "plane": ok}


def _induced_embedding(embedding, vertex_set):
    g = embedding.graph
    vmap = {v: i for i, v in enumerate(sorted(vertex_set))}
    sub = WeightedGraph(len(vmap))
    emap = {}
    for eid, (u, v, w) in enumerate(g.edges):
        if u in vmap and v in vmap:
            emap[eid] = sub.add_edge(vmap[u], vmap[v], w)
    rot = []
    for v in sorted(vertex_set):
        rot.append([(emap[e], k) for (e, k) in embedding.rotation[v]])
    return sub, rot


def minFaceCover(embedding, terminals, cap=20):
    """Minimum set of faces whose boundaries include every terminal.

    Exact subset search while the face count is within the cap, else a
    greedy cover flagged as an upper bound.  Returns (face ids, exact).
    """
    terminals = set(terminals)
    if not terminals:
        return [], True
    faces, _ = traceFaces(embedding)
    incident = [f.vertices() for f in faces]
    for t in terminals:
        if not any(t in inc for inc in incident):
            raise ValidationError(f"terminal {t} lies on no face")
    ids = list(range(len(faces)))
    if len(faces) <= cap:
        for k in range(1, len(faces) + 1):
            for combo in itertools.combinations(ids, k):
                cov = set()
                for f in combo:
                    cov |= incident[f]
                if terminals <= cov:
                    return list(combo), True
        raise AssertionError("all faces together cover every vertex")
    chosen = []
    left = set(terminals)
    while left:
        f = max(ids, key=lambda f: (len(incident[f] & left), -f))
        chosen.append(f)
        left -= incident[f]
    return sorted(chosen), False


def embeddingFromInstance(instance):
    if instance.rotation is None:
        raise ValidationError("instance carries no rotation")
    return RotationEmbedding.from_edge_lists(instance.graph, instance.rotation)


def planarRotation(graph):
    """A plane rotation for a planar simple graph via networkx, or None.

    Only used as plumbing to give corpus instances an embedding; the
    format is the same per-vertex edge-id lists as the JSON key.
    """
    import networkx as nx
    G = nx.MultiGraph()
    G.add_nodes_from(range(graph.n))
    eids = {}
    simple = nx.Graph()
    simple.add_nodes_from(range(graph.n))
    for eid, (u, v, _) in enumerate(graph.edges):
        if u == v or simple.has_edge(u, v):
            return None  # planarity plumbing handles simple graphs only
        simple.add_edge(u, v)
        eids[(u, v)] = eid
        eids[(v, u)] = eid
    ok, emb = nx.check_planarity(simple)
    if not ok:
        return None
    lists = []
    for v in range(graph.n):
        if simple.degree(v):
            lists.append([eids[(v, u)] for u in emb.neighbors_cw_order(v)])
        else:
            lists.append([])
    return lists
