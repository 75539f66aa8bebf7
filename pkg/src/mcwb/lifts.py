"""Instance transformations along pattern projections, and the expansion
of weighted instances into unit-weight ones.

Lifting reverses a projection step: a terminal deleted from H comes back
as an isolated vertex, and a terminal produced by identification is split
again, with the two originals tied together by heavy length-two paths.
"""

from fractions import Fraction

import networkx as nx

from .core import (
    INF,
    CapExceeded,
    DemandPattern,
    MulticutInstance,
    ValidationError,
    WeightedGraph,
    is_finite,
)
from .patterns import pattern_to_graph

EXPAND_WEIGHT_CAP = 10000


class LiftReport:
    def __init__(self, input_instance, output_instance, steps_applied,
                 shortcut=None):
        self.input = input_instance
        self.output = output_instance
        self.steps_applied = list(steps_applied)
        self.shortcut = shortcut
        if output_instance is not None:
            a = output_instance.graph.n + output_instance.graph.edge_count()
            b = max(1, input_instance.graph.n + input_instance.graph.edge_count())
            self.size_ratio = Fraction(a, b)
        else:
            self.size_ratio = Fraction(1)


def _iso_map(A, B):
    """Isomorphism A -> B as a dict, or None."""
    gm = nx.isomorphism.GraphMatcher(A, B)
    if gm.is_isomorphic():
        return dict(gm.mapping)
    return None


def _identified(H, u, v):
    K = H.copy()
    for w in list(K.neighbors(v)):
        if w != u:
            K.add_edge(u, w)
    K.remove_node(v)
    return K


def _pattern_on_graph(H, placement):
    """DemandPattern realizing H with vertices placed at graph ids."""
    terminals = [placement[h] for h in sorted(H.nodes, key=lambda x: placement[x])]
    demands = [(placement[a], placement[b]) for (a, b) in H.edges]
    return DemandPattern(terminals, demands)


def liftDeleteVertex(instance, H):
    """Lift (G',H',lam) to (G,H,lam) where H' = H minus one vertex.

    The missing terminal is added back as an isolated vertex; decision
    answers are unchanged since an isolated terminal never needs cutting.
    """
    Hp = pattern_to_graph(instance.pattern)
    v0 = tau = None
    for cand in sorted(H.nodes):
        K = H.copy()
        K.remove_node(cand)
        m = _iso_map(K, Hp)
        if m is not None:
            v0, tau = cand, m
            break
    if v0 is None:
        raise ValidationError("no vertex of H deletes to the instance pattern")
    g = instance.graph.copy()
    new_id = g.n
    g.n += 1
    placement = {h: tau[h] for h in H.nodes if h != v0}
    placement[v0] = new_id
    pattern = _pattern_on_graph(H, placement)
    rotation = None
    if instance.rotation is not None:
        rotation = [list(r) for r in instance.rotation] + [[]]
    out = MulticutInstance(g, pattern, instance.budget, rotation)
    return LiftReport(instance, out, [("delete", v0)])


def liftIdentify(instance, H):
    """Lift (G',H',lam) to (G,H,lam) where H' identifies two nonadjacent
    vertices of H.

    If every edge of G' can be cut within the budget, the instance is a
    trivial yes and the report short-circuits.  Otherwise the merged
    terminal is split: the second copy is a fresh vertex joined to the
    first by |E(G')| length-two paths of weight W (the maximum edge
    weight), which no budget-respecting cut can sever.
    """
    Hp = pattern_to_graph(instance.pattern)
    found = None
    for u0 in sorted(H.nodes):
        for v0 in sorted(H.nodes):
            if v0 <= u0 or H.has_edge(u0, v0):
                continue
            m = _iso_map(_identified(H, u0, v0), Hp)
            if m is not None:
                found = (u0, v0, m)
                break
        if found:
            break
    if found is None:
        raise ValidationError(
            "no nonadjacent pair of H identifies to the instance pattern")
    u0, v0, tau = found
    gp = instance.graph
    W = 0
    for (_, _, w) in gp.edges:
        if w is INF or w > W:
            W = w
            if w is INF:
                break
    lam = instance.budget
    m_edges = gp.edge_count()
    if lam is not None and is_finite(W) and m_edges * W <= lam:
        return LiftReport(instance, None, [("identify", u0, v0)],
                          shortcut="yesInstance")

    g = gp.copy()
    rotation = None if instance.rotation is None else \
        [list(r) for r in instance.rotation]
    u0_vertex = tau[u0]
    v0_vertex = g.n
    g.n += 1
    if rotation is not None:
        rotation.append([])
    u0_bundle = []
    v0_bundle = []
    for _ in range(m_edges):
        mid = g.n
        g.n += 1
        e1 = g.add_edge(u0_vertex, mid, W)
        e2 = g.add_edge(mid, v0_vertex, W)
        if rotation is not None:
            rotation.append([e1, e2])
        u0_bundle.append(e1)
        v0_bundle.append(e2)
    if rotation is not None:
        # consecutive at u0, reversed order at v0: the paths nest planarly
        rotation[u0_vertex] = rotation[u0_vertex] + u0_bundle
        rotation[v0_vertex] = list(reversed(v0_bundle))
    placement = {h: tau[h] for h in H.nodes if h not in (u0, v0)}
    placement[u0] = u0_vertex
    placement[v0] = v0_vertex
    pattern = _pattern_on_graph(H, placement)
    out = MulticutInstance(g, pattern, lam, rotation)
    return LiftReport(instance, out, [("identify", u0, v0)])


def liftProjection(instance, H, steps):
    """Lift an instance along a whole projection witness, one reversed
    step at a time.  H projected by `steps` must match the instance's
    pattern up to isomorphism."""
    from .patterns import applyProjection
    chain = [H.copy()]
    for s in steps:
        chain.append(applyProjection(chain[-1], [s]))
    Hp = pattern_to_graph(instance.pattern)
    if _iso_map(chain[-1], Hp) is None:
        raise ValidationError("witness does not project H to the pattern")
    cur = instance
    applied = []
    for i in range(len(steps) - 1, -1, -1):
        step = steps[i]
        if step[0] == "delete":
            rep = liftDeleteVertex(cur, chain[i])
        else:
            rep = liftIdentify(cur, chain[i])
        applied += rep.steps_applied
        if rep.shortcut is not None:
            return LiftReport(instance, None, applied, shortcut=rep.shortcut)
        cur = rep.output
    return LiftReport(instance, cur, applied)


def expandToUnweighted(instance, cap=EXPAND_WEIGHT_CAP):
    """Replace every weight-w edge by w internally disjoint length-two
    paths of unit edges.  Weight-1 edges are kept verbatim; weight-0
    edges are dropped (cutting them is free either way)."""
    g = instance.graph
    total = 0
    for (_, _, w) in g.edges:
        if w is INF:
            raise ValidationError(
                "INF edge cannot be expanded; replace it by budget+1 first")
        total += w
    if total > cap:
        raise CapExceeded(f"total weight {total} exceeds expansion cap {cap}")

    out = WeightedGraph(g.n)
    rot_in = instance.rotation
    rotation = None if rot_in is None else [[] for _ in range(g.n)]
    # per old edge: the list of new edge ids seen from each endpoint
    end_bundle = {}
    for eid, (u, v, w) in enumerate(g.edges):
        if w == 0:
            end_bundle[eid] = ([], [])
            continue
        if w == 1:
            ne = out.add_edge(u, v, 1)
            end_bundle[eid] = ([ne], [ne])
            continue
        us, vs = [], []
        for _ in range(w):
            mid = out.n
            out.n += 1
            e1 = out.add_edge(u, mid, 1)
            e2 = out.add_edge(mid, v, 1)
            if rotation is not None:
                rotation.append([e1, e2])
            us.append(e1)
            vs.append(e2)
        end_bundle[eid] = (us, list(reversed(vs)))
    if rotation is not None:
        seen_once = set()
        for v in range(g.n):
            for eid in rot_in[v]:
                first_end = eid not in seen_once
                seen_once.add(eid)
                a, b = end_bundle[eid]
                rotation[v].extend(a if first_end else b)
    pattern = DemandPattern(instance.pattern.terminals,
                            instance.pattern.demand_edges)
    return MulticutInstance(out, pattern, instance.budget, rotation)
