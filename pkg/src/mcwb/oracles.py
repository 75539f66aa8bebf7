"""Ground-truth multicut solvers and exact treewidth for small graphs.

Two independent exact engines: a branch-and-bound over vertex partitions
and a dynamic program over tree decompositions.  Every other module is
validated against these.
"""

import itertools
from collections import deque

from .core import (
    INF,
    CapExceeded,
    ValidationError,
    WeightedGraph,
    canonicalizeSolution,
)

PARTITION_CAP = 12
TWDP_WIDTH_CAP = 14


# ---------------------------------------------------------------------------
# partition oracle


def minMulticutByPartition(instance, cap=PARTITION_CAP):
    """Exact minimum multicut by branch and bound over vertex partitions.

    Every multicut induces the partition of V into components of G minus
    the cut, and the cross edges of that partition form a multicut of no
    larger weight.  So the optimum over all partitions separating the
    demanded pairs equals the multicut optimum.

    Returns (weight, cut) with the cut canonicalized; among optimal cuts
    the lexicographically smallest canonical sequence is returned.
    """
    g = instance.graph
    if g.n > cap:
        raise CapExceeded(f"partition oracle capped at {cap} vertices, got {g.n}")
    demands = instance.pattern.demand_edges
    if not demands:
        return 0, []

    conflict = [set() for _ in range(g.n)]
    for (a, b) in demands:
        conflict[a].add(b)
        conflict[b].add(a)

    # edges whose later endpoint is v (placed once v is assigned)
    pending = [[] for _ in range(g.n)]
    for eid, (u, v, w) in enumerate(g.edges):
        if u == v:
            continue
        pending[max(u, v)].append((min(u, v), eid, w))

    block_of = [-1] * g.n
    block_members = []
    best = [INF, None]  # weight, cut tuple

    def candidate_better(weight, cut):
        if weight < best[0]:
            return True
        if weight == best[0] and (best[1] is None or tuple(cut) < best[1]):
            return True
        return False

    def rec(v, cost, cut):
        if cost > best[0]:
            return
        if v == g.n:
            c = canonicalizeSolution(cut)
            if candidate_better(cost, c):
                best[0] = cost
                best[1] = tuple(c)
            return
        choices = len(block_members)
        for b in range(choices + 1):
            if b < choices:
                if conflict[v] and not conflict[v].isdisjoint(block_members[b]):
                    continue
            added_cost = 0
            added = []
            for (u, eid, w) in pending[v]:
                if block_of[u] != b:
                    added_cost += w
                    added.append(eid)
            if b == choices:
                block_members.append(set())
            block_members[b].add(v)
            block_of[v] = b
            rec(v + 1, cost + added_cost, cut + added)
            block_members[b].discard(v)
            block_of[v] = -1
            if b == choices:
                block_members.pop()

    rec(0, 0, [])
    assert best[1] is not None
    return best[0], list(best[1])


# ---------------------------------------------------------------------------
# tree decompositions


class TreeDecomposition:
    def __init__(self, bags, tree_edges):
        self.bags = [frozenset(b) for b in bags]
        self.tree_edges = [tuple(e) for e in tree_edges]
        self.width = max((len(b) for b in self.bags), default=1) - 1

    def validate(self, graph):
        nb = len(self.bags)
        covered = set()
        for b in self.bags:
            covered |= b
        if covered != set(range(graph.n)):
            raise ValidationError("decomposition does not cover all vertices")
        for (u, v, _) in graph.edges:
            if not any(u in b and v in b for b in self.bags):
                raise ValidationError(f"edge ({u},{v}) not inside any bag")
        adj = {i: [] for i in range(nb)}
        for (i, j) in self.tree_edges:
            if not (0 <= i < nb and 0 <= j < nb):
                raise ValidationError("tree edge out of range")
            adj[i].append(j)
            adj[j].append(i)
        if nb and len(self.tree_edges) != nb - 1:
            raise ValidationError("decomposition tree is not a tree")
        # connectivity of the tree and of every vertex's bag set
        if nb:
            seen = {0}
            q = deque([0])
            while q:
                x = q.popleft()
                for y in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        q.append(y)
            if len(seen) != nb:
                raise ValidationError("decomposition tree is disconnected")
        for v in range(graph.n):
            holders = [i for i in range(nb) if v in self.bags[i]]
            seen = {holders[0]}
            q = deque([holders[0]])
            while q:
                x = q.popleft()
                for y in adj[x]:
                    if y not in seen and v in self.bags[y]:
                        seen.add(y)
                        q.append(y)
            if len(seen) != len(holders):
                raise ValidationError(f"bags containing {v} are not connected")
        return True

    def to_json(self):
        return {
            "bags": [sorted(b) for b in self.bags],
            "treeEdges": [list(e) for e in self.tree_edges],
        }

    @classmethod
    def from_json(cls, obj):
        return cls(obj["bags"], obj["treeEdges"])


def _elimination_decomposition(graph, order):
    """Tree decomposition from an elimination order (bag per vertex)."""
    n = graph.n
    if n == 0:
        return TreeDecomposition([frozenset()], [])
    nbrs = {v: set() for v in range(n)}
    for (u, v, _) in graph.edges:
        if u != v:
            nbrs[u].add(v)
            nbrs[v].add(u)
    pos = {v: i for i, v in enumerate(order)}
    bags = []
    live = {v: set(nbrs[v]) for v in range(n)}
    for v in order:
        later = {u for u in live[v] if pos[u] > pos[v]}
        bags.append(frozenset({v} | later))
        for a in later:
            live[a].discard(v)
            for b in later:
                if a != b:
                    live[a].add(b)
    tree_edges = []
    for i, v in enumerate(order):
        later = [u for u in bags[i] if u != v]
        if later:
            nxt = min(later, key=lambda u: pos[u])
            tree_edges.append((i, pos[nxt]))
        elif i + 1 < n:
            tree_edges.append((i, i + 1))  # keep the tree connected
    return TreeDecomposition(bags, tree_edges)


def greedyDecomposition(graph):
    """Min-fill elimination heuristic (ties by degree, then vertex id)."""
    n = graph.n
    if n == 0:
        return TreeDecomposition([frozenset()], [])
    nbrs = {v: set() for v in range(n)}
    for (u, v, _) in graph.edges:
        if u != v:
            nbrs[u].add(v)
            nbrs[v].add(u)
    order = []
    remaining = set(range(n))
    while remaining:
        def fill(v):
            ns = nbrs[v]
            return sum(1 for a, b in itertools.combinations(sorted(ns), 2)
                       if b not in nbrs[a])
        v = min(remaining, key=lambda v: (fill(v), len(nbrs[v]), v))
        order.append(v)
        ns = list(nbrs[v])
        for a in ns:
            for b in ns:
                if a != b:
                    nbrs[a].add(b)
        for a in ns:
            nbrs[a].discard(v)
        del nbrs[v]
        remaining.discard(v)
    return _elimination_decomposition(graph, order)


def exactTreewidth(graph, cap=32):
    """Exact treewidth with a witnessing decomposition, or "above cap".

    Treewidth <= k iff there is an elimination order in which every vertex
    has at most k later neighbors in the fill-in graph; search widths
    upward until one admits such an order.  Returns (width, decomposition)
    or ("above cap", None).
    """
    n = graph.n
    if n > 32:
        raise CapExceeded("exact treewidth capped at 32 vertices")
    if n == 0:
        return 0, TreeDecomposition([frozenset()], [])
    base = {v: frozenset(u for (u, _) in _simple_adj(graph)[v]) for v in range(n)}
    ub = greedyDecomposition(graph).width
    for width in range(min(cap, ub) + 1):
        order = _order_at_width(base, width)
        if order is not None:
            td = _elimination_decomposition(graph, order)
            assert td.width <= width
            return td.width, td
    # the greedy order itself succeeds at width ub, so reaching here means ub > cap
    return "above cap", None


def _order_at_width(base, width):
    """Find an elimination order whose max elimination degree is <= width."""
    n = len(base)
    memo = {}

    def go(nbrs, remaining):
        if not remaining:
            return []
        key = frozenset(remaining)
        if key in memo:
            return memo[key]
        out = None
        for v in sorted(remaining, key=lambda v: (len(nbrs[v]), v)):
            if len(nbrs[v]) > width:
                continue
            ns = nbrs[v]
            nn = {}
            for u in remaining:
                if u == v:
                    continue
                if u in ns:
                    nn[u] = (nbrs[u] | ns) - {u, v}
                else:
                    nn[u] = nbrs[u] - {v}
            rest = go(nn, remaining - {v})
            if rest is not None:
                out = [v] + rest
                break
        memo[key] = out
        return out

    return go(dict(base), frozenset(range(n)))


def _simple_adj(graph):
    adj = {v: set() for v in range(graph.n)}
    for (u, v, _) in graph.edges:
        if u != v:
            adj[u].add((v, 0))
            adj[v].add((u, 0))
    return adj


# ---------------------------------------------------------------------------
# tree decomposition DP


class GroupConstraint:
    """Connectivity/separation side conditions for the DP.

    groups: disjoint vertex sets; each group must end up inside a single
    component.  forbiddenMerges: pairs of group indices that must land in
    distinct components (default: all pairs).  forcedAssignments: extra
    vertices adjoined to a group.
    """

    def __init__(self, groups, forbidden_merges=None, forced_assignments=None):
        self.groups = [set(g) for g in groups]
        seen = set()
        for g in self.groups:
            if seen & g:
                raise ValidationError("groups must be pairwise disjoint")
            seen |= g
        if forced_assignments:
            for v, gi in forced_assignments.items():
                if v in seen and v not in self.groups[gi]:
                    raise ValidationError(f"vertex {v} forced into two groups")
                self.groups[gi].add(v)
                seen.add(v)
        if forbidden_merges is None:
            k = len(self.groups)
            forbidden_merges = {(i, j) for i in range(k) for j in range(i + 1, k)}
        self.forbidden = {(min(i, j), max(i, j)) for (i, j) in forbidden_merges}


class _NiceNode:
    __slots__ = ("kind", "bag", "children", "payload")

    def __init__(self, kind, bag, children, payload=None):
        self.kind = kind  # leaf | introduce | forget | join | edge
        self.bag = frozenset(bag)
        self.children = children
        self.payload = payload  # vertex for introduce/forget, edge id for edge


def _build_nice_tree(graph, td):
    """Root the decomposition and expand it into leaf/introduce/forget/join
    nodes, with one dedicated edge node per graph edge (loops skipped)."""
    nb = len(td.bags)
    adj = {i: [] for i in range(nb)}
    for (i, j) in td.tree_edges:
        adj[i].append(j)
        adj[j].append(i)

    edge_home = {}
    for eid, (u, v, _) in enumerate(graph.edges):
        if u == v:
            continue
        home = next(i for i in range(nb) if u in td.bags[i] and v in td.bags[i])
        edge_home.setdefault(home, []).append(eid)

    def chain(node, target_bag):
        """Forget/introduce chain transforming node.bag into target_bag."""
        cur = node
        for v in sorted(cur.bag - target_bag):
            cur = _NiceNode("forget", cur.bag - {v}, [cur], v)
        for v in sorted(target_bag - cur.bag):
            cur = _NiceNode("introduce", cur.bag | {v}, [cur], v)
        return cur

    def build(i, parent):
        kids = [build(j, i) for j in adj[i] if j != parent]
        bag = td.bags[i]
        if not kids:
            node = _NiceNode("leaf", frozenset(), [])
            node = chain(node, bag)
        else:
            kids = [chain(k, bag) for k in kids]
            node = kids[0]
            for k in kids[1:]:
                node = _NiceNode("join", bag, [node, k])
        for eid in sorted(edge_home.get(i, [])):
            node = _NiceNode("edge", bag, [node], eid)
        return node

    root = build(0, -1)
    return chain(root, frozenset())


def minMulticutByTreewidthDP(instance, decomposition=None, constraint=None,
                             mode="optimize", width_cap=TWDP_WIDTH_CAP):
    """Exact multicut via DP over a tree decomposition.

    DP state at a bag: a partition of the bag vertices into blocks (the
    components of the kept subgraph so far, restricted to the bag) with,
    per block, the set of special vertices (demand endpoints and group
    members) its component contains.  Each graph edge is either kept
    (merging blocks) or cut (paying its weight) at its dedicated node.

    Returns (weight, cut, count) where count is the exact number of
    optimal cut edge sets (only computed in count-optima mode, else None).
    """
    g = instance.graph
    if decomposition is None:
        decomposition = greedyDecomposition(g)
    decomposition.validate(g)
    if decomposition.width > width_cap:
        raise CapExceeded(
            f"decomposition width {decomposition.width} exceeds cap {width_cap}")

    demands = set(instance.pattern.demand_edges)
    group_of = {}
    groups = []
    forbidden = set()
    if constraint is not None:
        groups = constraint.groups
        forbidden = constraint.forbidden
        for gi, grp in enumerate(groups):
            for v in grp:
                if not (0 <= v < g.n):
                    raise ValidationError(f"group vertex {v} out of range")
                group_of[v] = gi
    special = set(group_of)
    for (a, b) in demands:
        special.add(a)
        special.add(b)

    counting = (mode == "count-optima")

    def block_ok(spec):
        """Specials allowed to share a component?"""
        for (a, b) in demands:
            if a in spec and b in spec:
                return False
        gs = sorted({group_of[v] for v in spec if v in group_of})
        for i in range(len(gs)):
            for j in range(i + 1, len(gs)):
                if (gs[i], gs[j]) in forbidden:
                    return False
        return True

    def finalize_ok(spec):
        """Component is complete (leaves the bag): groups inside it must be whole."""
        for gi in {group_of[v] for v in spec if v in group_of}:
            if not groups[gi] <= spec:
                return False
        return True

    # state: frozenset of (frozenset(block), frozenset(specials))
    # value: (weight, count, best_cut frozenset)
    def merge_value(table, state, weight, count, cut):
        old = table.get(state)
        if old is None:
            table[state] = (weight, count, cut)
            return
        ow, oc, ocut = old
        if weight < ow:
            table[state] = (weight, count, cut)
        elif weight == ow:
            bc = cut if tuple(sorted(cut)) < tuple(sorted(ocut)) else ocut
            table[state] = (ow, oc + count, bc)

    root = _build_nice_tree(g, decomposition)

    def run(node):
        if node.kind == "leaf":
            empty = frozenset()
            return {empty: (0, 1, frozenset())}
        if node.kind == "introduce":
            child = run(node.children[0])
            v = node.payload
            sv = frozenset({v} if v in special else ())
            out = {}
            for state, (w, c, cut) in child.items():
                ns = state | {(frozenset({v}), sv)}
                merge_value(out, ns, w, c, cut)
            return out
        if node.kind == "forget":
            child = run(node.children[0])
            v = node.payload
            out = {}
            for state, (w, c, cut) in child.items():
                ns = set()
                ok = True
                for (blk, spec) in state:
                    if v in blk:
                        rest = blk - {v}
                        if rest:
                            ns.add((rest, spec))
                        elif not finalize_ok(spec):
                            ok = False
                            break
                    else:
                        ns.add((blk, spec))
                if ok:
                    merge_value(out, frozenset(ns), w, c, cut)
            return out
        if node.kind == "edge":
            child = run(node.children[0])
            eid = node.payload
            u, v, wgt = g.edges[eid]
            out = {}
            for state, (w, c, cut) in child.items():
                # cut the edge
                merge_value(out, state, w + wgt, c, cut | {eid})
                # keep the edge: merge the blocks of u and v
                bu = next(p for p in state if u in p[0])
                bv = next(p for p in state if v in p[0])
                if bu == bv:
                    merge_value(out, state, w, c, cut)
                    continue
                spec = bu[1] | bv[1]
                if not block_ok(spec):
                    continue
                ns = (state - {bu, bv}) | {(bu[0] | bv[0], spec)}
                merge_value(out, ns, w, c, cut)
            return out
        if node.kind == "join":
            left = run(node.children[0])
            right = run(node.children[1])
            bag = node.bag
            out = {}
            # index right states by nothing; bags are equal, combine all pairs
            for s1, (w1, c1, cut1) in left.items():
                for s2, (w2, c2, cut2) in right.items():
                    merged = _combine_partitions(s1, s2, bag, block_ok)
                    if merged is None:
                        continue
                    merge_value(out, merged, w1 + w2, c1 * c2, cut1 | cut2)
            return out
        raise AssertionError(node.kind)

    table = run(root)
    empty = frozenset()
    if empty not in table:
        return INF, None, (0 if counting else None)
    w, c, cut = table[empty]
    return w, canonicalizeSolution(cut), (c if counting else None)


def _combine_partitions(s1, s2, bag, block_ok):
    """Union-join two bag partitions with their special annotations."""
    parent = {v: v for v in bag}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for state in (s1, s2):
        for (blk, _) in state:
            it = iter(blk)
            first = next(it)
            for v in it:
                parent[find(v)] = find(first)
    spec_of = {}
    for state in (s1, s2):
        for (blk, spec) in state:
            r = find(next(iter(blk)))
            spec_of[r] = spec_of.get(r, frozenset()) | spec
    blocks = {}
    for v in bag:
        blocks.setdefault(find(v), set()).add(v)
    out = set()
    for r, blk in blocks.items():
        spec = spec_of.get(r, frozenset())
        if not block_ok(spec):
            return None
        out.add((frozenset(blk), spec))
    return frozenset(out)


def bruteForceOptimalCutCount(instance):
    """Count optimal cut edge sets by exhaustive subset enumeration."""
    from .core import isMulticut
    g = instance.graph
    if len(g.edges) > 16:
        raise CapExceeded("brute-force count capped at 16 edges")
    best = INF
    count = 0
    for r in range(len(g.edges) + 1):
        for S in itertools.combinations(range(len(g.edges)), r):
            if not isMulticut(instance, set(S)):
                continue
            w = g.total_weight(S)
            if w < best:
                best = w
                count = 1
            elif w == best:
                count += 1
    return best, count
