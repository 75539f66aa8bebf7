"""Weighted multigraphs, demand patterns and the multicut predicate.

Edge weights are non-negative integers or the symbolic value INF.  No
floating point is used anywhere; all arithmetic is exact.
"""

import json
from collections import deque


class ValidationError(ValueError):
    """Malformed input (bad ids, inconsistent structures)."""


class CapExceeded(Exception):
    """Input exceeds a configured size cap; refused rather than attempted."""


class _Infinity:
    """Symbolic infinite weight.  Saturating addition, maximal in the order."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __add__(self, other):
        return self

    def __radd__(self, other):
        return self

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("mcwb-INF")

    def __repr__(self):
        return "INF"


INF = _Infinity()


def is_finite(w):
    return w is not INF


def check_weight(w):
    if w is INF:
        return w
    if not isinstance(w, int) or isinstance(w, bool) or w < 0:
        raise ValueError(f"weight must be a non-negative integer or INF, got {w!r}")
    return w


def weight_to_json(w):
    return "inf" if w is INF else w


def weight_from_json(x):
    if x == "inf":
        return INF
    return check_weight(x)


class WeightedGraph:
    """Undirected multigraph with weighted edges.

    Vertices are 0..n-1.  Edges are stored as a list of (u, v, w) triples;
    the position in the list is the stable edge id.  Loops and parallel
    edges are permitted.
    """

    def __init__(self, vertex_count, edges=()):
        if vertex_count < 0:
            raise ValueError("vertex count must be non-negative")
        self.n = vertex_count
        self.edges = []
        for (u, v, w) in edges:
            self.add_edge(u, v, w)

    def add_edge(self, u, v, w):
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise ValueError(f"edge ({u},{v}) out of range for n={self.n}")
        self.edges.append((u, v, check_weight(w)))
        return len(self.edges) - 1

    def edge_count(self):
        return len(self.edges)

    def weight(self, eid):
        return self.edges[eid][2]

    def endpoints(self, eid):
        u, v, _ = self.edges[eid]
        return u, v

    def adjacency(self, removed=frozenset()):
        """Neighbor lists skipping the given edge ids."""
        adj = {v: [] for v in range(self.n)}
        for eid, (u, v, _) in enumerate(self.edges):
            if eid in removed:
                continue
            adj[u].append((v, eid))
            if u != v:
                adj[v].append((u, eid))
        return adj

    def total_weight(self, edge_ids):
        return sum(self.edges[e][2] for e in edge_ids)

    def copy(self):
        return WeightedGraph(self.n, list(self.edges))

    def simple_merge(self):
        """Merge parallel edges by weight sum and drop loops.

        Returns (graph, origin) where origin maps each new edge id to the
        list of old edge ids it absorbed.  Loops never separate anything,
        so multicut optima are unchanged.
        """
        groups = {}
        for eid, (u, v, w) in enumerate(self.edges):
            if u == v:
                continue
            key = (min(u, v), max(u, v))
            groups.setdefault(key, []).append(eid)
        g = WeightedGraph(self.n)
        origin = []
        for (u, v) in sorted(groups):
            ids = groups[(u, v)]
            g.add_edge(u, v, sum(self.edges[e][2] for e in ids))
            origin.append(ids)
        return g, origin

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, m={len(self.edges)})"


class DemandPattern:
    """Demand graph H: terminals plus the pairs that must be separated."""

    def __init__(self, terminals, demand_edges):
        self.terminals = list(dict.fromkeys(terminals))
        tset = set(self.terminals)
        self.demand_edges = set()
        for (a, b) in demand_edges:
            if a == b:
                raise ValueError("demand edge must join distinct terminals")
            if a not in tset or b not in tset:
                raise ValueError(f"demand pair ({a},{b}) uses a non-terminal")
            self.demand_edges.add((min(a, b), max(a, b)))

    def __repr__(self):
        return f"DemandPattern(t={len(self.terminals)}, d={len(self.demand_edges)})"


class MulticutInstance:
    def __init__(self, graph, pattern, budget=None, rotation=None):
        for v in pattern.terminals:
            if not (0 <= v < graph.n):
                raise ValueError(f"terminal {v} is not a vertex of the graph")
        self.graph = graph
        self.pattern = pattern
        self.budget = None if budget is None else check_weight(budget)
        self.rotation = rotation


def componentsOf(graph, removed=frozenset()):
    """Partition of the vertices into connected components of G minus `removed`.

    Returns a list of sorted vertex lists, ordered by smallest member.
    """
    removed = set(removed)
    for e in removed:
        if not (0 <= e < len(graph.edges)):
            raise ValueError(f"unknown edge id {e}")
    adj = graph.adjacency(removed)
    seen = [False] * graph.n
    comps = []
    for start in range(graph.n):
        if seen[start]:
            continue
        comp = []
        queue = deque([start])
        seen[start] = True
        while queue:
            v = queue.popleft()
            comp.append(v)
            for (u, _) in adj[v]:
                if not seen[u]:
                    seen[u] = True
                    queue.append(u)
        comps.append(sorted(comp))
    return comps


def component_index(graph, removed=frozenset()):
    """Map vertex -> component id for G minus `removed`."""
    idx = {}
    for i, comp in enumerate(componentsOf(graph, removed)):
        for v in comp:
            idx[v] = i
    return idx


def isMulticut(instance, S):
    """True iff every demanded pair is disconnected in G minus S."""
    idx = component_index(instance.graph, S)
    return all(idx[a] != idx[b] for (a, b) in instance.pattern.demand_edges)


def canonicalizeSolution(S):
    return sorted(set(S))


def contractInfinityEdges(instance):
    """Contract every INF-weight edge into a single vertex per class.

    A finite-weight cut never contains an INF edge, so the minimum
    multicut weight is preserved whenever it is finite.  Returns
    (instance, vertex_map); the instance is None when some demanded pair
    gets identified, in which case the optimum is INF.  Self-loops and
    the rotation are dropped; the budget is kept.
    """
    g = instance.graph
    parent = list(range(g.n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for (u, v, w) in g.edges:
        if w is INF:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[max(ru, rv)] = min(ru, rv)
    ids = {}
    for v in range(g.n):
        r = find(v)
        if r not in ids:
            ids[r] = len(ids)
    vmap = {v: ids[find(v)] for v in range(g.n)}
    demands = sorted({tuple(sorted((vmap[a], vmap[b])))
                      for (a, b) in instance.pattern.demand_edges})
    if any(a == b for (a, b) in demands):
        return None, vmap
    h = WeightedGraph(len(ids))
    for (u, v, w) in g.edges:
        if w is INF or vmap[u] == vmap[v]:
            continue
        h.add_edge(vmap[u], vmap[v], w)
    terminals = sorted({vmap[t] for t in instance.pattern.terminals})
    out = MulticutInstance(h, DemandPattern(terminals, demands),
                           instance.budget, None)
    return out, vmap


def instance_to_json(instance):
    obj = {
        "n": instance.graph.n,
        "edges": [[u, v, weight_to_json(w)] for (u, v, w) in instance.graph.edges],
        "terminals": list(instance.pattern.terminals),
        "demands": [list(d) for d in sorted(instance.pattern.demand_edges)],
    }
    if instance.budget is not None:
        obj["budget"] = weight_to_json(instance.budget)
    if instance.rotation is not None:
        obj["rotation"] = instance.rotation
    return obj


def instance_from_json(obj):
    g = WeightedGraph(obj["n"])
    for (u, v, w) in obj["edges"]:
        g.add_edge(u, v, weight_from_json(w))
    pattern = DemandPattern(obj.get("terminals", []), obj.get("demands", []))
    budget = obj.get("budget")
    if budget is not None:
        budget = weight_from_json(budget)
    return MulticutInstance(g, pattern, budget, obj.get("rotation"))


def load_instance(path):
    with open(path) as f:
        return instance_from_json(json.load(f))


def save_instance(instance, path):
    with open(path, "w") as f:
        json.dump(instance_to_json(instance), f, indent=1)
        f.write("\n")
