"""Exact planar multicut solving by dual-topology enumeration.

The search mirrors the verified-improvement loop: start from the full
edge set, enumerate candidate dual topologies (disjoint unions of cubic
multigraphs and loop vertices, with at most t faces when drawn), place
each into the parcels of a setup, and keep the cheapest placement whose
crossed G-edges actually form a multicut.

Instead of solving one placement problem per crossing plan, candidates
are walked in increasing trail-cost order with early termination: the
discretization of a minimum dual costs exactly the optimal cut weight,
so the first costs that exceed the best verified cut can be skipped.
Per-arc crossing plans are deduplicated by the set of G-edges their
cheapest trail crosses; matching crossing sequences already guarantee
the multicut property regardless of the route, so only distinct crossed
sets need separate verification.  Orientations are covered implicitly:
reversing an arc corresponds to reversing its crossing sequence.
"""

import heapq
import itertools

from .core import (
    CapExceeded,
    DemandPattern,
    MulticutInstance,
    ValidationError,
    WeightedGraph,
    canonicalizeSolution,
    component_index,
    componentsOf,
    is_finite,
)
from .dual import TrailOracle, buildSetup, solveDiscretizedEmbedding
from .embedding import (
    RotationEmbedding,
    embeddingFromInstance,
    minFaceCover,
    planarRotation,
    traceFaces,
)
from .oracles import PARTITION_CAP, exactTreewidth, minMulticutByPartition

# repo calibrations, not paper constants: suggested treewidth budgets
BETA_MU_OFFSET = 3  # budget 2*mu + 3 for extended-biclique distance mu
BETA_SQRT_COEFF = 3  # budget ceil(3 * sqrt(t)) from the face-count root bound

DEFAULT_CROSSING_LEN = 2  # calibration default; the 2|E(K)| bound is configurable


class SolverCaps:
    def __init__(self, maxDualVertices=None, maxCrossingLen=None,
                 maxTopologies=128, treewidthBudget=3, maxCandidates=500000):
        self.maxDualVertices = maxDualVertices  # None: 2t at solve time
        self.maxCrossingLen = maxCrossingLen  # None: calibration default
        self.maxTopologies = maxTopologies
        self.treewidthBudget = treewidthBudget
        self.maxCandidates = maxCandidates

    def resolved(self, t, k_edges):
        caps = SolverCaps(
            self.maxDualVertices if self.maxDualVertices is not None else 2 * t,
            self.maxCrossingLen if self.maxCrossingLen is not None
            else DEFAULT_CROSSING_LEN,
            self.maxTopologies, self.treewidthBudget, self.maxCandidates)
        return caps

    def to_json(self):
        return {
            "maxDualVertices": self.maxDualVertices,
            "maxCrossingLen": self.maxCrossingLen,
            "maxTopologies": self.maxTopologies,
            "treewidthBudget": self.treewidthBudget,
            "maxCandidates": self.maxCandidates,
        }

    @classmethod
    def from_json(cls, obj):
        caps = cls()
        for key in caps.to_json():
            if key in obj:
                setattr(caps, key, obj[key])
        return caps


class SolveResult:
    def __init__(self, weight, cut, certifiedOptimal, strategy, statistics):
        self.weight = weight
        self.cut = canonicalizeSolution(cut)
        self.certifiedOptimal = certifiedOptimal
        self.strategy = strategy
        self.statistics = dict(statistics)

    def to_json(self):
        from .core import weight_to_json
        return {
            "weight": weight_to_json(self.weight),
            "cut": list(self.cut),
            "certifiedOptimal": self.certifiedOptimal,
            "strategy": self.strategy,
            "statistics": self.statistics,
        }


# ---------------------------------------------------------------------------
# topology enumeration
# ---------------------------------------------------------------------------

def _multigraph_canonical(n, edges):
    """Minimum relabeling of a multigraph's sorted edge tuple."""
    best = None
    for perm in itertools.permutations(range(n)):
        key = tuple(sorted(
            (min(perm[u], perm[v]), max(perm[u], perm[v])) for (u, v) in edges))
        if best is None or key < best:
            best = key
    return (n, best)


def _cubic_components(k):
    """All connected multigraphs on k vertices with every degree exactly 3,
    up to isomorphism, as sorted edge tuples."""
    found = {}
    deg = [0] * k
    edges = []

    def connected():
        adj = [set() for _ in range(k)]
        for (u, v) in edges:
            adj[u].add(v)
            adj[v].add(u)
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == k

    def rec():
        open_vs = [v for v in range(k) if deg[v] < 3]
        if not open_vs:
            if connected():
                key = _multigraph_canonical(k, edges)
                if key not in found:
                    found[key] = tuple(sorted(edges))
            return
        u = open_vs[0]
        if deg[u] <= 1:
            deg[u] += 2
            edges.append((u, u))
            rec()
            edges.pop()
            deg[u] -= 2
        for v in open_vs:
            if v == u:
                continue
            deg[u] += 1
            deg[v] += 1
            edges.append((u, v))
            rec()
            edges.pop()
            deg[u] -= 1
            deg[v] -= 1

    rec()
    return [found[key] for key in sorted(found)]


def _component_library(max_vertices, t):
    """Components of admissible dual topologies: the loop vertex plus
    connected cubic multigraphs, with per-component face contribution
    (|E| - |V| + 1) bounded so unions can stay within t faces."""
    lib = [(1, ((0, 0),), 1)]  # single vertex with a loop; one inner face
    k = 2
    while k <= max_vertices and k // 2 + 1 <= t - 1:
        for edges in _cubic_components(k):
            lib.append((k, edges, k // 2 + 1))
        k += 2
    return lib


def _graph_from_components(combo):
    total = sum(k for (k, _, _) in combo)
    g = WeightedGraph(total)
    offset = 0
    for (k, edges, _) in combo:
        for (u, v) in edges:
            g.add_edge(u + offset, v + offset, 1)
        offset += k
    return g


def _abstract_faces(graph, removed_vertices=frozenset()):
    """Face count of a plane drawing: |E| - |V| + components + 1."""
    keep = [v for v in range(graph.n) if v not in removed_vertices]
    edges = [e for e, (u, v, _) in enumerate(graph.edges)
             if u not in removed_vertices and v not in removed_vertices]
    if not keep:
        return 1
    vmap = {v: i for i, v in enumerate(keep)}
    sub = WeightedGraph(len(keep))
    for e in edges:
        u, v, w = graph.edges[e]
        sub.add_edge(vmap[u], vmap[v], w)
    comps = len(componentsOf(sub))
    return sub.edge_count() - sub.n + comps + 1


def _subgraph_without(graph, removed_vertices):
    keep = [v for v in range(graph.n) if v not in removed_vertices]
    vmap = {v: i for i, v in enumerate(keep)}
    sub = WeightedGraph(len(keep))
    for (u, v, w) in graph.edges:
        if u in vmap and v in vmap:
            sub.add_edge(vmap[u], vmap[v], w)
    return sub


def enumerateTopologies(t, caps, face_cover_size=None):
    """Admissible dual topologies with their pinnable vertex sets.

    Yields (C, x_candidates) in deterministic order: every disjoint
    union of cubic multigraphs and loop vertices with at most
    caps.maxDualVertices vertices and at most t faces when drawn.
    x_candidates lists the subsets X with treewidth(C - X) within the
    budget (and, when a face cover of size k is in play, with C - X
    having at most k faces).  Raises CapExceeded past maxTopologies.
    """
    if caps.maxDualVertices is None:
        caps = caps.resolved(t, 0)
    lib = _component_library(caps.maxDualVertices, t)
    combos = []

    def build(start, combo, used_v, used_f):
        if combo:
            combos.append(list(combo))
        for i in range(start, len(lib)):
            (k, edges, f) = lib[i]
            if used_v + k <= caps.maxDualVertices and used_f + f + 1 <= t:
                combo.append(lib[i])
                build(i, combo, used_v + k, used_f + f)
                combo.pop()

    build(0, [], 0, 0)
    combos.sort(key=lambda c: (sum(k for (k, _, _) in c),
                               sum(len(e) for (_, e, _) in c),
                               tuple(sorted((k, e) for (k, e, _) in c))))
    if len(combos) > caps.maxTopologies:
        raise CapExceeded(
            f"{len(combos)} topologies exceed cap {caps.maxTopologies}")
    for combo in combos:
        C = _graph_from_components(combo)
        x_candidates = []
        for size in range(C.n + 1):
            for X in itertools.combinations(range(C.n), size):
                Xset = frozenset(X)
                sub = _subgraph_without(C, Xset)
                if sub.n == 0:
                    width = 0
                else:
                    width, _ = exactTreewidth(sub, cap=8)
                if not isinstance(width, int) or width > caps.treewidthBudget:
                    continue
                if face_cover_size is not None and \
                        _abstract_faces(C, Xset) > face_cover_size:
                    continue
                x_candidates.append(Xset)
        yield C, x_candidates


def _minimal_sets(sets):
    out = []
    for s in sorted(sets, key=lambda s: (len(s), sorted(s))):
        if not any(m <= s for m in out):
            out.append(s)
    return out


# ---------------------------------------------------------------------------
# the solver
# ---------------------------------------------------------------------------

def _free_cost_rows(pg):
    """Per start parcel, the cheapest G-weight to reach every parcel when
    K-edges may be crossed freely: a lower bound for every planned trail."""
    import heapq as hq
    rows = []
    for p1 in range(pg.n_parcels):
        dist = {p1: 0}
        heap = [(0, p1)]
        while heap:
            d, p = hq.heappop(heap)
            if d > dist[p]:
                continue
            for (q, w, _) in pg.g_steps[p]:
                if is_finite(w) and (q not in dist or d + w < dist[q]):
                    dist[q] = d + w
                    hq.heappush(heap, (d + w, q))
            for (q, _) in pg.k_steps[p]:
                if q not in dist or d < dist[q]:
                    dist[q] = d
                    hq.heappush(heap, (d, q))
        rows.append([dist.get(p, None) for p in range(pg.n_parcels)])
    return rows


def _sigma_options(k_ids, q1):
    out = [()]
    frontier = [()]
    for _ in range(q1):
        frontier = [s + (k,) for s in frontier for k in k_ids]
        out.extend(frontier)
    return out


def _arc_list(C):
    return [((u, v) if u <= v else (v, u)) for (u, v, _) in C.edges]


def _trivial_result(strategy, statistics=None):
    stats = {"trivial": True}
    if statistics:
        stats.update(statistics)
    return SolveResult(0, [], True, strategy, stats)


def solveMulticutPlanar(instance, embedding=None, caps=None):
    """Minimum multicut of a plane-embedded instance via the dual search.

    Unconditionally sound: the returned cut is verified to separate all
    demands.  certifiedOptimal reports whether the weight was confirmed
    by the partition oracle or the caps cover the provable bounds.
    """
    return _solve(instance, embedding, caps, None, "generic")


def solveWithFaceCover(instance, embedding, face_ids, caps=None):
    """Like solveMulticutPlanar, with a face cover F* steering the
    enumeration: dual vertices drawn inside F* faces may be pinned there
    and the rest of the dual must stay few-faced and thin."""
    if embedding is None:
        embedding = _resolve_embedding(instance)
    faces, _ = traceFaces(embedding)
    face_ids = sorted(set(face_ids))
    for f in face_ids:
        if not (0 <= f < len(faces)):
            raise ValidationError(f"unknown face id {f}")
    covered = set()
    for f in face_ids:
        covered |= faces[f].vertices()
    if not set(instance.pattern.terminals) <= covered:
        raise ValidationError("face set does not cover every terminal")
    return _solve(instance, embedding, caps, face_ids, "face-cover")


def _resolve_embedding(instance):
    if instance.rotation is not None:
        return embeddingFromInstance(instance)
    rot = planarRotation(instance.graph)
    if rot is None:
        raise ValidationError("instance is not planar; solving unsupported")
    return RotationEmbedding.from_edge_lists(instance.graph, rot)


def _solve(instance, embedding, caps, face_ids, strategy):
    caps = caps or SolverCaps()
    if not instance.pattern.demand_edges:
        return _trivial_result(strategy)
    if embedding is None:
        embedding = _resolve_embedding(instance)
    comps = componentsOf(instance.graph)
    if len(comps) == 1:
        return _solve_connected(instance, embedding, caps, face_ids, strategy)
    return _solve_split(instance, embedding, caps, face_ids, strategy, comps)


def _solve_split(instance, embedding, caps, face_ids, strategy, comps):
    """Solve each connected component separately; demands across
    components are already separated."""
    if face_ids is not None:
        raise ValidationError("face covers require a connected graph")
    g = instance.graph
    total_weight = 0
    cut = []
    certified = True
    stats = {"components": len(comps), "perComponent": []}
    for comp in comps:
        cset = set(comp)
        vmap = {v: i for i, v in enumerate(comp)}
        sub = WeightedGraph(len(comp))
        emap = {}
        for eid, (u, v, w) in enumerate(g.edges):
            if u in cset and v in cset:
                emap[sub.add_edge(vmap[u], vmap[v], w)] = eid
        terms = [vmap[t] for t in instance.pattern.terminals if t in cset]
        demands = [(vmap[a], vmap[b])
                   for (a, b) in instance.pattern.demand_edges
                   if a in cset and b in cset]
        if not demands:
            continue
        rot = None
        if instance.rotation is not None:
            rmap = {eid: ne for ne, eid in emap.items()}
            rot = [[rmap[e] for e in instance.rotation[v]] for v in comp]
        subinst = MulticutInstance(sub, DemandPattern(terms, demands),
                                  None, rot)
        res = _solve(subinst, None, caps, None, strategy)
        total_weight = total_weight + res.weight
        cut.extend(emap[e] for e in res.cut)
        certified = certified and res.certifiedOptimal
        stats["perComponent"].append(res.statistics)
    return SolveResult(total_weight, cut, certified, strategy, stats)


def _pairwise_cut_union(g, demands):
    """Union of one minimum s-t cut per demanded pair, or None.

    Separating every pair separately certainly separates them jointly,
    so the union is a valid multicut and its weight an upper bound."""
    if not demands:
        return None
    import networkx as nx
    cap = {}
    ids = {}
    for eid, (u, v, w) in enumerate(g.edges):
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        c = float("inf") if not is_finite(w) else w
        cap[key] = cap.get(key, 0) + c
        ids.setdefault(key, []).append(eid)
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    for (u, v), c in cap.items():
        G.add_edge(u, v, capacity=c)
    union = set()
    for (a, b) in sorted(demands):
        try:
            _, (sa, _) = nx.minimum_cut(G, a, b)
        except nx.NetworkXUnbounded:
            return None
        for (u, v), eids in ids.items():
            if (u in sa) != (v in sa):
                union.update(eids)
    return sorted(union)


def _solve_connected(instance, embedding, caps, face_ids, strategy):
    g = instance.graph
    pattern = instance.pattern
    terms = sorted(set(pattern.terminals))
    t = len(terms)
    if t < 2:
        return _trivial_result(strategy)
    _, genus = traceFaces(embedding)
    if genus != 0:
        raise ValidationError("solving is supported in the plane only")

    K, pg = buildSetup(embedding, terms)
    caps_r = caps.resolved(t, len(K.walks))
    q1 = caps_r.maxCrossingLen
    k_ids = list(pg.k_edge_ids)
    oracle = TrailOracle(pg)
    sigmas = _sigma_options(k_ids, q1) if k_ids else [()]
    free_rows = _free_cost_rows(pg)
    if face_ids is None:
        special = list(range(pg.n_parcels))
        cover_k = None
    else:
        special = pg.specialParcels(face_ids)
        cover_k = len(face_ids)

    # per (p1, p2): crossing-plan options deduplicated by crossed G-set
    option_cache = {}

    def options(p1, p2):
        key = (p1, p2)
        if key not in option_cache:
            by_set = {}
            for sigma in sigmas:
                c = oracle.cost(p1, p2, sigma)
                if not is_finite(c):
                    continue
                trail = oracle.trail(p1, p2, sigma)
                gset = frozenset(trail.g_edges())
                cur = by_set.get(gset)
                if cur is None or (c, sigma) < cur:
                    by_set[gset] = (c, sigma)
            option_cache[key] = sorted(
                (c, sorted(gset), gset, sigma)
                for gset, (c, sigma) in by_set.items())
        return option_cache[key]

    # the running multicut: all edges, always valid, then tightened by a
    # cheap upper bound (the union of one minimum cut per demanded pair
    # is itself a multicut) so the ranked search can prune early
    best_cut = list(range(g.edge_count()))
    best_weight = 0
    for (_, _, w) in g.edges:
        best_weight = best_weight + w
    greedy = _pairwise_cut_union(g, pattern.demand_edges)
    if greedy is not None:
        gw = 0
        for e in greedy:
            gw = gw + g.weight(e)
        if gw < best_weight:
            best_weight = gw
            best_cut = canonicalizeSolution(greedy)
    best_candidate = None

    stats = {
        "parcels": pg.n_parcels,
        "kEdges": len(K.walks),
        "crossings": sum(len(w.crossed) for w in K.walks),
        "caps": caps_r.to_json(),
        "topologies": 0,
        "pairsEnumerated": 0,
        "candidatesEvaluated": 0,
        "candidatesVerified": 0,
        "truncated": False,
    }

    entries = []
    topo_store = []
    try:
        topo_iter = list(enumerateTopologies(t, caps_r, cover_k))
    except CapExceeded:
        topo_iter = []
        stats["truncated"] = True
    for C, x_candidates in topo_iter:
        stats["topologies"] += 1
        stats["pairsEnumerated"] += len(x_candidates)
        arcs = _arc_list(C)
        for X in _minimal_sets(x_candidates):
            domains = [sorted(special) if v in X else range(pg.n_parcels)
                       for v in range(C.n)]
            if any(len(list(d)) == 0 for d in domains):
                continue
            ti = len(topo_store)
            topo_store.append((C, arcs, X))
            for phi in itertools.product(*domains):
                lb = 0
                for (u, v) in arcs:
                    c = free_rows[phi[u]][phi[v]]
                    if c is None:
                        lb = None
                        break
                    lb = lb + c
                if lb is not None:
                    entries.append((lb, ti, phi))
    entries.sort()

    demands = pattern.demand_edges

    def verify(gset_union):
        idx = component_index(g, gset_union)
        return all(idx[a] != idx[b] for (a, b) in demands)

    evaluated = 0
    for (lb, ti, phi) in entries:
        if lb > best_weight or evaluated >= caps_r.maxCandidates:
            if evaluated >= caps_r.maxCandidates:
                stats["truncated"] = True
            break
        C, arcs, X = topo_store[ti]
        opts = []
        feasible = True
        for (u, v) in arcs:
            o = options(phi[u], phi[v])
            if not o:
                feasible = False
                break
            opts.append(o)
        if not feasible:
            continue
        base = sum(o[0][0] for o in opts)
        heap = [(base, (0,) * len(opts))]
        seen = {(0,) * len(opts)}
        while heap and evaluated < caps_r.maxCandidates:
            cost, idxs = heapq.heappop(heap)
            if cost > best_weight:
                break
            evaluated += 1
            union = set()
            for o, i in zip(opts, idxs):
                union |= o[i][2]
            weight = 0
            for e in union:
                weight = weight + g.weight(e)
            if weight < best_weight or (
                    weight == best_weight and
                    canonicalizeSolution(union) < best_cut):
                if verify(union):
                    stats["candidatesVerified"] += 1
                    best_weight = weight
                    best_cut = canonicalizeSolution(union)
                    best_candidate = (ti, phi,
                                      tuple(o[i][3] for o, i in
                                            zip(opts, idxs)))
            for j in range(len(opts)):
                if idxs[j] + 1 < len(opts[j]):
                    nxt = idxs[:j] + (idxs[j] + 1,) + idxs[j + 1:]
                    if nxt not in seen:
                        seen.add(nxt)
                        cost2 = cost - opts[j][idxs[j]][0] \
                            + opts[j][idxs[j] + 1][0]
                        heapq.heappush(heap, (cost2, nxt))
        if evaluated >= caps_r.maxCandidates:
            stats["truncated"] = True
            break
    stats["candidatesEvaluated"] = evaluated

    dual = None
    if best_candidate is not None:
        ti, phi, Gamma = best_candidate
        C, arcs, X = topo_store[ti]
        psi = {v: phi[v] for v in range(C.n)}
        dual = solveDiscretizedEmbedding(pg, C, [0] * C.edge_count(),
                                         set(range(C.n)), psi, list(Gamma))
        assert dual is not None
    certified = _certify(instance, best_weight, caps_r, t, len(k_ids), stats)
    result = SolveResult(best_weight, best_cut, certified, strategy, stats)
    result.dual = dual
    result.parcel_graph = pg
    result.cut_graph = K
    return result


def _certify(instance, weight, caps_r, t, n_k_edges, stats):
    if instance.graph.n <= PARTITION_CAP:
        opt, _ = minMulticutByPartition(instance)
        stats["oracleWeight"] = opt if is_finite(opt) else "inf"
        return opt == weight
    if stats["truncated"]:
        return False
    return (caps_r.maxDualVertices >= 2 * t and
            caps_r.maxCrossingLen >= 2 * n_k_edges)


# ---------------------------------------------------------------------------
# strategy analysis
# ---------------------------------------------------------------------------

def analyzeInstance(instance, embedding=None):
    """Strategy recommendation: extended-biclique distance mu of the
    demand pattern, face cover number k of the terminals, and a
    suggested treewidth budget (both constants are repo calibrations)."""
    import math

    from .patterns import (extendedBicliqueDistance, isTrivialPattern,
                           pattern_to_graph)
    H = pattern_to_graph(instance.pattern)
    t = len(instance.pattern.terminals)
    report = {"t": t}
    if isTrivialPattern(H):
        report["trivialPattern"] = True
        report["mu"] = 0
        report["note"] = ("pattern is trivial; one two-set separation "
                          "solves the instance")
    else:
        report["trivialPattern"] = False
        mu, _, exact = extendedBicliqueDistance(H)
        report["mu"] = mu
        report["muExact"] = exact
    cover = None
    if embedding is None and instance.rotation is not None:
        embedding = embeddingFromInstance(instance)
    if embedding is not None:
        try:
            cover, exact_cover = minFaceCover(embedding,
                                              instance.pattern.terminals)
            report["faceCover"] = cover
            report["k"] = len(cover)
            report["faceCoverExact"] = exact_cover
        except ValidationError:
            pass
    mu_budget = 2 * report["mu"] + BETA_MU_OFFSET
    sqrt_budget = math.ceil(BETA_SQRT_COEFF * math.sqrt(max(1, t)))
    report["suggestedTreewidthBudget"] = min(mu_budget, sqrt_budget)
    report["budgetSources"] = {"muCalibration": mu_budget,
                               "sqrtCalibration": sqrt_budget}
    return report
