"""Network and path types, shortest paths, bounded path enumeration and
the disjointness / sharing metrics used by path selection."""

from __future__ import annotations

import heapq
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

COST_TOL = 1e-9

Edge = tuple[int, int]


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def cost_eq(a: float, b: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= COST_TOL * max(1.0, abs(a), abs(b))


def cost_le(a: float, b: float) -> bool:
    return a <= b or cost_eq(a, b)


class GraphError(ValueError):
    """Raised when a network or path violates its structural invariants."""


@dataclass(frozen=True, order=False)
class Path:
    """A simple path as a node sequence plus its precomputed cost."""

    nodes: tuple[int, ...]
    cost: float = field(compare=False)

    @property
    def length(self) -> int:
        return len(self.nodes) - 1

    @property
    def origin(self) -> int:
        return self.nodes[0]

    @property
    def destination(self) -> int:
        return self.nodes[-1]

    @property
    def edges(self) -> frozenset[Edge]:
        n = self.nodes
        return frozenset(edge_key(n[i], n[i + 1]) for i in range(len(n) - 1))

    def edge_list(self) -> list[Edge]:
        n = self.nodes
        return [edge_key(n[i], n[i + 1]) for i in range(len(n) - 1)]

    def sort_key(self) -> tuple:
        return (self.cost, len(self.nodes), self.nodes)

    def __lt__(self, other: "Path") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return " ".join(map(str, self.nodes))


def canonical(paths: Iterable[Path]) -> list[Path]:
    """Paths ordered by (cost, length, node sequence)."""
    return sorted(paths, key=Path.sort_key)


class Network:
    """Undirected, simple, connected graph with positive weights.

    Nodes are dense indices ``0..n-1``; ``labels`` maps them back to the
    identifiers used in topology files. ``edge_nodes`` is the set N of
    traffic-originating nodes.
    """

    def __init__(
        self,
        n_nodes: int,
        edges: Iterable[tuple[int, int, float]],
        edge_nodes: Iterable[int],
        labels: Sequence[str] | None = None,
    ) -> None:
        if n_nodes < 1:
            raise GraphError("network needs at least one node")
        self.n = n_nodes
        self.labels: tuple[str, ...] = (
            tuple(str(i) for i in range(n_nodes)) if labels is None else tuple(labels)
        )
        if len(self.labels) != n_nodes:
            raise GraphError("label count does not match node count")
        if len(set(self.labels)) != n_nodes:
            raise GraphError("node labels must be unique")
        adj: list[dict[int, float]] = [{} for _ in range(n_nodes)]
        for u, v, w in edges:
            if not (0 <= u < n_nodes and 0 <= v < n_nodes):
                raise GraphError(f"edge ({u}, {v}) references an unknown node")
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if v in adj[u]:
                raise GraphError(f"parallel edge ({u}, {v})")
            w = float(w)
            if not (w > 0) or math.isinf(w):
                raise GraphError(f"edge ({u}, {v}) has non-positive weight {w}")
            adj[u][v] = w
            adj[v][u] = w
        self.adj: tuple[dict[int, float], ...] = tuple(adj)
        self.edges: tuple[Edge, ...] = tuple(
            sorted(edge_key(u, v) for u in range(n_nodes) for v in adj[u] if u < v)
        )
        self.edge_index: dict[Edge, int] = {e: i for i, e in enumerate(self.edges)}
        en = sorted(set(edge_nodes))
        if not en:
            raise GraphError("edge-node set is empty")
        for v in en:
            if not 0 <= v < n_nodes:
                raise GraphError(f"edge node {v} is not a node")
        self.edge_nodes: tuple[int, ...] = tuple(en)
        if not self._connected():
            raise GraphError("network is not connected")
        self._index = {lab: i for i, lab in enumerate(self.labels)}

    def _connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in self.adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.n

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def weight(self, u: int, v: int) -> float:
        return self.adj[u][v]

    def total_weight(self) -> float:
        return sum(self.adj[u][v] for u, v in self.edges)

    def node(self, label: str) -> int:
        return self._index[label]

    def weighted_edges(self) -> list[tuple[int, int, float]]:
        return [(u, v, self.adj[u][v]) for u, v in self.edges]

    def path(self, nodes: Sequence[int]) -> Path:
        """Build a validated :class:`Path` over this network."""
        nodes = tuple(nodes)
        if len(nodes) < 2:
            raise GraphError("a path needs at least two nodes")
        if len(set(nodes)) != len(nodes):
            raise GraphError(f"path {nodes} is not simple")
        cost = 0.0
        for a, b in zip(nodes, nodes[1:]):
            w = self.adj[a].get(b) if 0 <= a < self.n else None
            if w is None:
                raise GraphError(f"path {nodes} uses non-edge ({a}, {b})")
            cost += w
        return Path(nodes, cost)

    def pairs(self) -> Iterator[tuple[int, int]]:
        en = self.edge_nodes
        for i, x in enumerate(en):
            for y in en[i + 1:]:
                yield x, y

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.edge_nodes == other.edge_nodes
            and self.weighted_edges() == other.weighted_edges()
        )

    def __repr__(self) -> str:
        return f"Network(|V|={self.n}, |E|={self.n_edges}, |N|={len(self.edge_nodes)})"


@dataclass(frozen=True)
class PathSet:
    origin: int
    destination: int
    paths: tuple[Path, ...]

    def __post_init__(self) -> None:
        for p in self.paths:
            if p.origin != self.origin or p.destination != self.destination:
                raise GraphError(f"path {p} does not join {self.origin} and {self.destination}")
        if len(set(self.paths)) != len(self.paths):
            raise GraphError("duplicate path in path set")

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self) -> Iterator[Path]:
        return iter(self.paths)


def _check_pair(net: Network, x: int, y: int) -> None:
    if x == y:
        raise GraphError("origin and destination must differ")
    if not (0 <= x < net.n and 0 <= y < net.n):
        raise GraphError(f"({x}, {y}) is not a node pair of the network")


def dijkstra(
    net: Network,
    source: int,
    weights: Mapping[Edge, float] | None = None,
    banned: frozenset[Edge] | set[Edge] = frozenset(),
    hop_tiebreak: bool = True,
) -> tuple[list[float], list[int], list[int]]:
    """Single-source shortest paths.

    Returns ``(dist, hops, pred)``. With ``hop_tiebreak`` the label is the
    pair (cost, hops), so equal-cost routes prefer fewer edges. Remaining
    ties keep the predecessor settled first; heap entries are ordered by
    node index, so lower indices win.
    """
    inf = math.inf
    dist = [inf] * net.n
    hops = [net.n + 1] * net.n
    pred = [-1] * net.n
    done = [False] * net.n
    dist[source] = 0.0
    hops[source] = 0
    heap = [(0.0, 0, source)]
    adj = net.adj
    while heap:
        d, h, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w in adj[u].items():
            if done[v]:
                continue
            e = edge_key(u, v)
            if e in banned:
                continue
            if weights is not None:
                w = weights[e]
            nd = d + w
            nh = h + 1
            if nd < dist[v] and not cost_eq(nd, dist[v]):
                better = True
            elif hop_tiebreak and cost_eq(nd, dist[v]) and nh < hops[v]:
                better = True
            else:
                better = False
            if better:
                dist[v] = nd
                hops[v] = nh
                pred[v] = u
                heapq.heappush(heap, (nd, nh if hop_tiebreak else 0, v))
    return dist, hops, pred


def _unwind(pred: list[int], source: int, target: int) -> list[int]:
    seq = [target]
    while seq[-1] != source:
        seq.append(pred[seq[-1]])
    seq.reverse()
    return seq


def min_cost(net: Network, x: int, y: int) -> tuple[float, Path]:
    """Minimum path cost from x to y and an optimal witness path.

    The witness has the fewest edges among min-cost paths.
    """
    _check_pair(net, x, y)
    dist, _, pred = dijkstra(net, x)
    return dist[y], net.path(_unwind(pred, x, y))


def shortest_path_avoiding(
    net: Network, x: int, y: int, banned: Iterable[Edge]
) -> Path | None:
    """Cheapest path that uses none of ``banned``, or None if y is cut off."""
    banned = frozenset(banned)
    dist, _, pred = dijkstra(net, x, banned=banned)
    if math.isinf(dist[y]):
        return None
    return net.path(_unwind(pred, x, y))


def _distances_to(net: Network, y: int) -> tuple[list[float], list[int]]:
    """Cost distance and BFS hop distance from every node to y."""
    dist, _, _ = dijkstra(net, y, hop_tiebreak=False)
    hops = [net.n + 1] * net.n
    hops[y] = 0
    frontier = [y]
    while frontier:
        nxt = []
        for u in frontier:
            for v in net.adj[u]:
                if hops[v] > hops[u] + 1:
                    hops[v] = hops[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist, hops


def enumerate_min_cost_paths(net: Network, x: int, y: int) -> tuple[list[Path], Path]:
    """All min-cost simple paths from x to y in canonical order, and an
    optimal path (min-cost with smallest length)."""
    _check_pair(net, x, y)
    dist, _ = _distances_to(net, y)
    adj = net.adj
    out: list[tuple[int, ...]] = []
    stack: list[int] = [x]

    # Walking only along tight edges; positive weights make this a DAG.
    def walk(u: int) -> None:
        if u == y:
            out.append(tuple(stack))
            return
        for v, w in adj[u].items():
            if cost_eq(w + dist[v], dist[u]):
                stack.append(v)
                walk(v)
                stack.pop()

    walk(x)
    paths = canonical(net.path(p) for p in out)
    optimal = min(paths, key=lambda p: (p.length, p.nodes))
    return paths, optimal


def enumerate_interesting_paths(
    net: Network, x: int, y: int, h: int, f: float
) -> list[Path]:
    """Min-cost paths plus every simple path within ``h`` extra hops and a
    factor ``f`` of the optimal cost, canonically ordered."""
    if h < 0:
        raise ValueError("h must be non-negative")
    if f < 1:
        raise ValueError("f must be at least 1")
    mincost, optimal = enumerate_min_cost_paths(net, x, y)
    dist, hopd = _distances_to(net, y)
    max_len = optimal.length + h
    max_cost = f * optimal.cost
    slack = COST_TOL * max(1.0, max_cost)
    adj = net.adj
    found: set[tuple[int, ...]] = {p.nodes for p in mincost}
    stack = [x]
    on_path = [False] * net.n
    on_path[x] = True

    def walk(u: int, c: float) -> None:
        if u == y:
            found.add(tuple(stack))
            return
        depth = len(stack)
        for v, w in adj[u].items():
            if on_path[v]:
                continue
            nc = c + w
            if depth + hopd[v] > max_len or nc + dist[v] > max_cost + slack:
                continue
            on_path[v] = True
            stack.append(v)
            walk(v, nc)
            stack.pop()
            on_path[v] = False

    walk(x, 0.0)
    return canonical(net.path(p) for p in found)


def count_simple_paths(net: Network, x: int, y: int, limit: int) -> int:
    """Number of simple x-y paths, counting stops once ``limit`` is reached.

    Branches from which y is unreachable without revisiting a node are cut,
    so the work is proportional to the paths counted.
    """
    _check_pair(net, x, y)
    adj = net.adj
    visited = [False] * net.n
    visited[x] = True
    count = 0

    def reaches(u: int) -> bool:
        seen = {u}
        stack = [u]
        while stack:
            a = stack.pop()
            if a == y:
                return True
            for b in adj[a]:
                if b not in seen and not visited[b]:
                    seen.add(b)
                    stack.append(b)
        return False

    def walk(u: int) -> None:
        nonlocal count
        for v in adj[u]:
            if count >= limit:
                return
            if visited[v]:
                continue
            if v == y:
                count += 1
                continue
            visited[v] = True
            if reaches(v):
                walk(v)
            visited[v] = False

    walk(x)
    return min(count, limit)


def k_cheapest_paths(net: Network, x: int, y: int, k: int) -> list[Path]:
    """Up to k cheapest simple paths (Yen's algorithm), ascending cost."""
    _check_pair(net, x, y)
    first = shortest_path_avoiding(net, x, y, ())
    result: list[Path] = [first]
    candidates: list[tuple[tuple, Path]] = []
    seen = {first.nodes}
    while len(result) < k:
        last = result[-1].nodes
        for i in range(len(last) - 1):
            spur = last[i]
            root = last[: i + 1]
            banned: set[Edge] = set()
            for p in result:
                if p.nodes[: i + 1] == root:
                    banned.add(edge_key(p.nodes[i], p.nodes[i + 1]))
            # Root nodes other than the spur are removed by banning their edges.
            for r in root[:-1]:
                for v in net.adj[r]:
                    banned.add(edge_key(r, v))
            tail = shortest_path_avoiding(net, spur, y, banned)
            if tail is None:
                continue
            nodes = root[:-1] + tail.nodes
            if nodes in seen:
                continue
            seen.add(nodes)
            p = net.path(nodes)
            heapq.heappush(candidates, (p.sort_key(), p))
        if not candidates:
            break
        result.append(heapq.heappop(candidates)[1])
    return result


def _conflict_masks(paths: Sequence[Path]) -> list[int]:
    ids: dict[Edge, int] = {}
    edge_masks = []
    for p in paths:
        m = 0
        for e in p.edge_list():
            m |= 1 << ids.setdefault(e, len(ids))
        edge_masks.append(m)
    n = len(paths)
    conflicts = [0] * n
    for i in range(n):
        mi = edge_masks[i]
        for j in range(i + 1, n):
            if mi & edge_masks[j]:
                conflicts[i] |= 1 << j
                conflicts[j] |= 1 << i
    return conflicts


def max_independent_set(conflicts: Sequence[int], candidates: int | None = None) -> int:
    """Size of a maximum independent set of a graph given as adjacency bitmasks."""
    if candidates is None:
        candidates = (1 << len(conflicts)) - 1
    best = 0

    def search(cand: int, size: int) -> None:
        nonlocal best
        # Vertices with no neighbour among candidates are always taken.
        free = 0
        rest = cand
        while rest:
            low = rest & -rest
            v = low.bit_length() - 1
            if not conflicts[v] & cand:
                free |= low
            rest ^= low
        if free:
            size += free.bit_count()
            cand &= ~free
        if not cand:
            if size > best:
                best = size
            return
        if size + cand.bit_count() <= best:
            return
        pivot, pivot_deg = -1, -1
        rest = cand
        while rest:
            low = rest & -rest
            v = low.bit_length() - 1
            d = (conflicts[v] & cand).bit_count()
            if d > pivot_deg:
                pivot, pivot_deg = v, d
            rest ^= low
        bit = 1 << pivot
        search(cand & ~bit & ~conflicts[pivot], size + 1)
        search(cand & ~bit, size)

    search(candidates, 0)
    return best


def disjointness_degree(paths: Iterable[Path]) -> int:
    """Largest number of pairwise edge-disjoint paths in the collection."""
    paths = list(paths)
    if not paths:
        return 0
    return max_independent_set(_conflict_masks(paths))


def sharing(paths: Iterable[Path]) -> int:
    """Sum over edges used by two or more paths of (|S|+1)^occurrences."""
    paths = list(paths)
    base = len(paths) + 1
    occ = Counter(e for p in paths for e in p.edge_list())
    return sum(base**c for c in occ.values() if c >= 2)
