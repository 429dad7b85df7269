"""Brute-force reference implementations used as test oracles.

Nothing here shares code with the package's search routines: paths come
from networkx, subsets from itertools, and trees are checked with
networkx's forest predicates.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter

import networkx as nx

TOL = 1e-9


def to_nx(net) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(net.n))
    for u, v, w in net.weighted_edges():
        g.add_edge(u, v, weight=w)
    return g


def path_edges(nodes):
    return [tuple(sorted(e)) for e in zip(nodes, nodes[1:])]


def path_cost(g, nodes):
    return sum(g[a][b]["weight"] for a, b in zip(nodes, nodes[1:]))


def all_paths(net, x, y):
    """Every simple x-y path as (cost, hops, nodes), sorted canonically."""
    g = to_nx(net)
    out = [(path_cost(g, p), len(p) - 1, tuple(p)) for p in nx.all_simple_paths(g, x, y)]
    return sorted(out)


def _close(a, b):
    return abs(a - b) <= TOL * max(1.0, abs(a), abs(b))


def optimal(net, x, y):
    ps = all_paths(net, x, y)
    c = ps[0][0]
    return min((p for p in ps if _close(p[0], c)), key=lambda p: (p[1], p[2]))


def min_cost_paths(net, x, y):
    ps = all_paths(net, x, y)
    c = ps[0][0]
    return [p[2] for p in ps if _close(p[0], c)]


def interesting_paths(net, x, y, h, f):
    oc, oh, _ = optimal(net, x, y)
    return [
        p[2] for p in all_paths(net, x, y)
        if _close(p[0], oc) or (p[1] <= oh + h and (p[0] <= f * oc or _close(p[0], f * oc)))
    ]


def bounded_paths(g, x, y, max_hops, max_cost):
    """Every simple x-y path with at most ``max_hops`` edges and cost at most
    ``max_cost``, by exhaustive depth-first search. Branches are cut only
    when a lower bound (distance to ``y`` ignoring simplicity) already
    exceeds a limit, so nothing qualifying is missed."""
    dist = nx.single_source_dijkstra_path_length(g, y, weight="weight")
    hops = nx.single_source_shortest_path_length(g, y)
    limit = max_cost + TOL * max(1.0, abs(max_cost))
    out = []
    stack = [(x, (x,), 0.0)]
    while stack:
        v, nodes, cost = stack.pop()
        if v == y:
            out.append(nodes)
            continue
        for u, data in g[v].items():
            c = cost + data["weight"]
            if u in nodes or c + dist[u] > limit or len(nodes) + hops[u] > max_hops:
                continue
            stack.append((u, nodes + (u,), c))
    return out


def count_simple_paths_upto(g, x, y, k):
    """min(k, number of simple x-y paths). A branch is entered only if ``y``
    stays reachable without revisiting the prefix, so every branch pays off."""
    found = 0

    def reachable(v, seen):
        rest = g.subgraph(u for u in g if u not in seen or u == v)
        return nx.has_path(rest, v, y)

    def walk(v, seen):
        nonlocal found
        if v == y:
            found += 1
            return
        for u in sorted(g[v]):
            if found >= k:
                return
            if u not in seen and reachable(u, seen):
                walk(u, seen | {u})

    walk(x, {x})
    return min(found, k)


def disjointness(paths) -> int:
    es = [set(path_edges(p)) for p in paths]
    for size in range(len(es), 0, -1):
        for combo in itertools.combinations(range(len(es)), size):
            if all(not (es[a] & es[b]) for a, b in itertools.combinations(combo, 2)):
                return size
    return 0


def sharing(paths) -> int:
    occ = Counter(e for p in paths for e in path_edges(p))
    base = len(paths) + 1
    return sum(base**c for c in occ.values() if c >= 2)


def best_subset(candidates, n, fixed=()):
    """Lexicographically first n-subset (in the given order) maximising
    disjointness of the union with ``fixed`` and then minimising sharing."""
    best, key = None, None
    for combo in itertools.combinations(candidates, n):
        s = list(fixed) + list(combo)
        k = (-disjointness(s), sharing(s))
        if key is None or k < key:
            best, key = list(combo), k
    return best


def canonical_order(net, paths):
    g = to_nx(net)
    return sorted(paths, key=lambda p: (path_cost(g, p), len(p), tuple(p)))


def select(net, x, y, k, h, f):
    """The fixed-parameter selection rule, written out directly."""
    c = canonical_order(net, min_cost_paths(net, x, y))
    if len(c) >= k:
        return best_subset(c, k)
    i = canonical_order(net, interesting_paths(net, x, y, h, f))
    if len(i) <= k:
        return i
    rest = [p for p in i if p not in c]
    return c + best_subset(rest, k - len(c), c)


def is_tree(nodes, edges) -> bool:
    g = nx.Graph()
    g.add_nodes_from(nodes)
    g.add_edges_from(edges)
    return nx.is_tree(g)


def is_forest(edges) -> bool:
    g = nx.Graph()
    g.add_edges_from(edges)
    return g.number_of_nodes() == 0 or nx.is_forest(g)


def tree_path(edges, a, b):
    g = nx.Graph()
    g.add_edges_from(edges)
    return tuple(nx.shortest_path(g, a, b))


def betweenness_root(nodes, edges):
    if len(nodes) == 1:
        return next(iter(nodes))
    g = nx.Graph()
    g.add_nodes_from(nodes)
    g.add_edges_from(edges)
    bc = nx.betweenness_centrality(g, normalized=False)
    top = max(bc.values())
    return min(v for v, s in bc.items() if math.isclose(s, top))
