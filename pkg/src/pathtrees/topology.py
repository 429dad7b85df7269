"""Regular test networks with known best paths, and the topology file format.

File grammar (UTF-8, one declaration per line, ``#`` starts a comment)::

    node <id> [edge]
    edge <id1> <id2> <weight>

Nodes must be declared before the edges that use them. Node indices follow
declaration order; ``edge`` marks a traffic-originating node.
"""

from __future__ import annotations

import enum
import io
import itertools
import re
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import IO, Iterable

from .graph import GraphError, Network, Path, PathSet


class Kind(str, enum.Enum):
    FULL_MESH = "full-mesh"
    RING = "ring"
    HIERARCHICAL = "hier"
    FOLDED_CLOS = "clos"


@dataclass(frozen=True)
class RegularSpec:
    kind: Kind
    size: int

    def __post_init__(self) -> None:
        if self.kind in (Kind.FULL_MESH, Kind.RING) and self.size < 3:
            raise ValueError(f"{self.kind.value} needs at least 3 nodes")
        if self.kind is Kind.FOLDED_CLOS and self.size < 2:
            raise ValueError("folded clos needs at least 2 nodes per layer")
        if self.kind is Kind.HIERARCHICAL and self.size < 1:
            raise ValueError("hierarchical network needs at least 1 level")

    @classmethod
    def parse(cls, text: str) -> "RegularSpec":
        """Parse ``kind:size``, e.g. ``full-mesh:12`` or ``hier:3``."""
        m = re.fullmatch(r"\s*([a-z-]+)\s*:\s*(\d+)\s*", text)
        if not m:
            raise ValueError(f"bad generator spec {text!r}, expected KIND:SIZE")
        aliases = {"mesh": "full-mesh", "fullmesh": "full-mesh", "hierarchical": "hier",
                   "folded-clos": "clos"}
        name = aliases.get(m.group(1), m.group(1))
        try:
            kind = Kind(name)
        except ValueError:
            raise ValueError(f"unknown network kind {m.group(1)!r}") from None
        return cls(kind, int(m.group(2)))

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.size}"


def _hier_levels(m: int) -> list[list[int]]:
    levels = []
    start = 0
    for lvl in range(m + 1):
        size = 2 ** (m + 1 - lvl)
        levels.append(list(range(start, start + size)))
        start += size
    return levels


def _hier_parents(m: int) -> dict[int, tuple[int, int]]:
    """Each node below the top links to two parents; groups of four siblings
    share the same parent pair."""
    levels = _hier_levels(m)
    parents = {}
    for lvl in range(m):
        up = levels[lvl + 1]
        for j, v in enumerate(levels[lvl]):
            g = j // 4
            parents[v] = (up[2 * g], up[2 * g + 1])
    return parents


def generate(spec: RegularSpec) -> Network:
    """Build the regular network described by ``spec``; all weights are 1."""
    n = spec.size
    if spec.kind is Kind.FULL_MESH:
        edges = [(u, v, 1) for u, v in itertools.combinations(range(n), 2)]
        return Network(n, edges, range(n))
    if spec.kind is Kind.RING:
        edges = [(i, (i + 1) % n, 1) for i in range(n)]
        return Network(n, edges, range(n))
    if spec.kind is Kind.FOLDED_CLOS:
        edges = [(u, n + v, 1) for u in range(n) for v in range(n)]
        return Network(2 * n, edges, range(n))
    levels = _hier_levels(n)
    total = sum(len(lv) for lv in levels)
    edges = [(v, p, 1) for v, ps in _hier_parents(n).items() for p in ps]
    return Network(total, edges, levels[0])


def node_level(spec: RegularSpec, v: int) -> int:
    """Level of a node in a hierarchical network (0 = leaves)."""
    for lvl, nodes in enumerate(_hier_levels(spec.size)):
        if v in nodes:
            return lvl
    raise ValueError(f"node {v} not in {spec}")


def _up_chains(parents: dict[int, tuple[int, int]], v: int, steps: int) -> list[tuple[int, ...]]:
    chains = [(v,)]
    for _ in range(steps):
        chains = [c + (p,) for c in chains for p in parents[c[-1]]]
    return chains


def best_paths(spec: RegularSpec, x: int, y: int) -> PathSet:
    """The best paths between edge nodes x and y, built from the structure
    of the network rather than by search."""
    net = generate(spec)
    if x == y or x not in net.edge_nodes or y not in net.edge_nodes:
        raise ValueError(f"({x}, {y}) is not a pair of distinct edge nodes")
    n = spec.size
    seqs: list[tuple[int, ...]]
    if spec.kind is Kind.FULL_MESH:
        seqs = [(x, y)] + [(x, z, y) for z in range(n) if z not in (x, y)]
    elif spec.kind is Kind.RING:
        fwd = [x]
        while fwd[-1] != y:
            fwd.append((fwd[-1] + 1) % n)
        back = [x]
        while back[-1] != y:
            back.append((back[-1] - 1) % n)
        seqs = [tuple(fwd), tuple(back)]
    elif spec.kind is Kind.FOLDED_CLOS:
        seqs = [(x, n + u, y) for u in range(n)]
    else:
        parents = _hier_parents(n)
        for steps in range(1, n + 1):
            up_x = _up_chains(parents, x, steps)
            up_y = _up_chains(parents, y, steps)
            seqs = [
                cx + tuple(reversed(cy[:-1]))
                for cx in up_x
                for cy in up_y
                if cx[-1] == cy[-1]
            ]
            if seqs:
                break
    paths = sorted((net.path(s) for s in seqs), key=Path.sort_key)
    return PathSet(x, y, tuple(paths))


def all_best_paths(spec: RegularSpec) -> list[Path]:
    net = generate(spec)
    return [p for x, y in net.pairs() for p in best_paths(spec, x, y)]


def best_k(spec: RegularSpec, x: int, y: int) -> int:
    """Number of best paths for the pair, the per-pair k that selects them."""
    return len(best_paths(spec, x, y))


def min_tree_count(spec: RegularSpec) -> int:
    """Minimum number of trees covering all best paths."""
    if spec.kind is Kind.HIERARCHICAL:
        return 2 ** (2 * spec.size - 1)
    return spec.size


def selection_params(spec: RegularSpec) -> tuple[int, int, float]:
    """(k, h, f) that make path selection return exactly the best paths."""
    n = spec.size
    if spec.kind is Kind.FULL_MESH:
        k, h = n - 1, 1
    elif spec.kind is Kind.RING:
        k, h = 2, n - 2
    elif spec.kind is Kind.HIERARCHICAL:
        k, h = 2 ** (2 * n - 1), 0
    else:
        k, h = n, 0
    # With unit weights any f >= h + 1 leaves only the hop bound active.
    return k, h, float(h + 1)


# -- topology files ----------------------------------------------------------

class TopologyParseError(GraphError):
    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _parse_weight(tok: str, lineno: int) -> float:
    try:
        w = float(tok)
    except ValueError:
        raise TopologyParseError(f"bad weight {tok!r}", lineno) from None
    if not w > 0 or w == float("inf"):
        raise TopologyParseError(f"weight must be positive, got {tok}", lineno)
    return w


def parse_topology(lines: Iterable[str], prune: bool = False) -> Network:
    labels: list[str] = []
    index: dict[str, int] = {}
    edge_nodes: list[int] = []
    edges: list[tuple[int, int, float]] = []
    seen_edges: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "node":
            if len(tok) not in (2, 3) or (len(tok) == 3 and tok[2] != "edge"):
                raise TopologyParseError("expected 'node <id> [edge]'", lineno)
            if tok[1] in index:
                raise TopologyParseError(f"node {tok[1]!r} declared twice", lineno)
            index[tok[1]] = len(labels)
            labels.append(tok[1])
            if len(tok) == 3:
                edge_nodes.append(index[tok[1]])
        elif tok[0] == "edge":
            if len(tok) != 4:
                raise TopologyParseError("expected 'edge <id1> <id2> <weight>'", lineno)
            for t in tok[1:3]:
                if t not in index:
                    raise TopologyParseError(f"unknown node {t!r}", lineno)
            u, v = index[tok[1]], index[tok[2]]
            if u == v:
                raise TopologyParseError(f"self-loop at {tok[1]!r}", lineno)
            key = (min(u, v), max(u, v))
            if key in seen_edges:
                raise TopologyParseError(f"duplicate edge {tok[1]} {tok[2]}", lineno)
            seen_edges.add(key)
            edges.append((u, v, _parse_weight(tok[3], lineno)))
        else:
            raise TopologyParseError(f"unknown declaration {tok[0]!r}", lineno)
    if not labels:
        raise TopologyParseError("no nodes declared")
    if not edge_nodes:
        raise TopologyParseError("no edge nodes declared")
    net = Network(len(labels), edges, edge_nodes, labels)
    return prune_degree_one(net) if prune else net


def load_topology(source: str | FsPath | IO[str], prune: bool = False) -> Network:
    """Read a topology file (path or open text stream)."""
    if isinstance(source, (str, FsPath)):
        with open(source, encoding="utf-8") as fh:
            return parse_topology(fh, prune)
    return parse_topology(source, prune)


def _fmt_weight(w: float) -> str:
    return str(int(w)) if float(w).is_integer() else repr(w)


def dump_topology(net: Network, fh: IO[str] | None = None) -> str:
    """Serialize ``net`` in the topology file format; returns the text."""
    out = io.StringIO()
    en = set(net.edge_nodes)
    for v, lab in enumerate(net.labels):
        out.write(f"node {lab}{' edge' if v in en else ''}\n")
    for u, v, w in net.weighted_edges():
        out.write(f"edge {net.labels[u]} {net.labels[v]} {_fmt_weight(w)}\n")
    text = out.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def prune_degree_one(net: Network) -> Network:
    """Repeatedly drop nodes of degree one; indices are renumbered densely."""
    alive = set(range(net.n))
    deg = {v: len(net.adj[v]) for v in alive}
    queue = [v for v in alive if deg[v] == 1]
    while queue and len(alive) > 2:
        v = queue.pop()
        if v not in alive or deg[v] != 1:
            continue
        alive.discard(v)
        for u in net.adj[v]:
            if u in alive:
                deg[u] -= 1
                if deg[u] == 1:
                    queue.append(u)
    keep = sorted(alive)
    if len(keep) == net.n:
        return net
    remap = {v: i for i, v in enumerate(keep)}
    edges = [(remap[u], remap[v], w) for u, v, w in net.weighted_edges() if u in alive and v in alive]
    en = [remap[v] for v in net.edge_nodes if v in alive]
    if not en:
        raise GraphError("pruning removed every edge node")
    return Network(len(keep), edges, en, [net.labels[v] for v in keep])
