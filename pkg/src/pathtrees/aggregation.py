"""Deterministic aggregation of a path set into covering trees.

Compatible path pairs are inserted first, in decreasing order of
compatibility degree, aggregation potential and pair length; the paths
left over are then inserted one by one, longest first. Node and edge sets
are held as integer bitmasks so every compatibility test is a handful of
word operations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .graph import Edge, GraphError, Network, Path


@dataclass(frozen=True)
class Tree:
    nodes: frozenset[int]
    edges: frozenset[Edge]
    covered_paths: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if len(self.edges) != len(self.nodes) - 1:
            raise GraphError("tree must have exactly |nodes| - 1 edges")

    def covers(self, path: Path) -> bool:
        return path.edges <= self.edges

    @classmethod
    def from_path(cls, path: Path) -> "Tree":
        return cls(frozenset(path.nodes), path.edges)


@dataclass(frozen=True)
class AggregationResult:
    trees: tuple[Tree, ...]
    cover: tuple[int, ...]
    phase_log: dict[str, int] = field(compare=False)

    def __len__(self) -> int:
        return len(self.trees)


# -- compatibility on plain sets --------------------------------------------

def _degree(v1: frozenset, e1: frozenset, v2: frozenset, e2: frozenset) -> int:
    common = len(v1 & v2)
    if not common:
        return 0
    # Two trees sharing a node have a connected union, a tree iff |E| = |V| - 1.
    if len(e1 | e2) != len(v1 | v2) - 1:
        return -1
    return common


def compat_paths(p: Path, q: Path) -> int:
    """-1 if the union of the two paths has a cycle, else their common node count."""
    return _degree(frozenset(p.nodes), p.edges, frozenset(q.nodes), q.edges)


def compat_path_tree(p: Path, t: Tree) -> int:
    return _degree(frozenset(p.nodes), p.edges, t.nodes, t.edges)


def compat_pair_tree(p: Path, q: Path, t: Tree) -> int:
    vp, vq = frozenset(p.nodes), frozenset(q.nodes)
    v = t.nodes | vp | vq
    e = t.edges | p.edges | q.edges
    touching = len(t.nodes & vp) + len(t.nodes & vq)
    # The pair itself is connected (its paths are compatible).
    components = 1 if touching else 2
    if len(e) != len(v) - components:
        return -1
    return touching


def aggregation_potential(p: Path, s: Iterable[Path]) -> int:
    """Sum of the positive compatibility degrees between p and the rest of s."""
    total = 0
    for q in s:
        if q != p:
            c = compat_paths(p, q)
            if c > 0:
                total += c
    return total


def lsp_mtp_tree_count(n: int, k: int) -> int:
    """Lower bound on trees when paths are grouped per destination."""
    if n < 2 or k < 1:
        raise ValueError("need n >= 2 and k >= 1")
    return (n - 1) * k


# -- the aggregation algorithm ----------------------------------------------

class _TreeState:
    __slots__ = ("vm", "em")

    def __init__(self, vm: int, em: int) -> None:
        self.vm = vm
        self.em = em


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


Observer = Callable[[int, frozenset, frozenset], None]


def aggregate(
    net: Network, paths: Sequence[Path], observer: Observer | None = None
) -> AggregationResult:
    """Aggregate ``paths`` into covering trees of ``net``.

    ``observer(tree_index, nodes, edges)`` is called after every tree
    creation or insertion, which lets tests check the tree invariant at
    each step. ``cover[i]`` is the tree that first covered path i.
    """
    paths = list(paths)
    n = len(paths)
    for p in paths:
        net.path(p.nodes)
    if len(set(paths)) != n:
        raise GraphError("duplicate paths in aggregation input")
    eidx = net.edge_index
    vm = []
    em = []
    for p in paths:
        m = 0
        for v in p.nodes:
            m |= 1 << v
        vm.append(m)
        m = 0
        for e in p.edge_list():
            m |= 1 << eidx[e]
        em.append(m)
    vcount = [len(p.nodes) for p in paths]
    length = [p.length for p in paths]
    order = sorted(range(n), key=lambda i: paths[i].sort_key())
    rank = [0] * n
    for r, i in enumerate(order):
        rank[i] = r

    # Phase 1: compatible pairs and aggregation potentials.
    pi: list[int] = []
    pj: list[int] = []
    pc: list[int] = []
    pot = [0] * n
    for i in range(n):
        vi, ei, ci = vm[i], em[i], vcount[i]
        for j in range(i + 1, n):
            common = vi & vm[j]
            if not common:
                continue
            c = common.bit_count()
            if (ei | em[j]).bit_count() == ci + vcount[j] - c - 1:
                pi.append(i)
                pj.append(j)
                pc.append(c)
                pot[i] += c
                pot[j] += c
    ai = np.asarray(pi, dtype=np.int64)
    aj = np.asarray(pj, dtype=np.int64)
    ac = np.asarray(pc, dtype=np.int64)
    apot = np.asarray(pot, dtype=np.int64)
    alen = np.asarray(length, dtype=np.int64)
    arank = np.asarray(rank, dtype=np.int64)
    if len(ai):
        r1, r2 = arank[ai], arank[aj]
        lo, hi = np.minimum(r1, r2), np.maximum(r1, r2)
        seq = np.lexsort((hi, lo, -(alen[ai] + alen[aj]), -(apot[ai] + apot[aj]), -ac))
    else:
        seq = np.zeros(0, dtype=np.int64)

    trees: list[_TreeState] = []
    covered_by = [-1] * n
    log = {
        "compatible_pairs": len(ai),
        "pairs_aggregated": 0,
        "pairs_postponed": 0,
        "trees_from_pairs": 0,
        "singles": 0,
        "singles_aggregated": 0,
        "trees_from_singles": 0,
    }

    def notify(t: int) -> None:
        if observer is not None:
            st = trees[t]
            observer(
                t,
                frozenset(_bits(st.vm)),
                frozenset(net.edges[b] for b in _bits(st.em)),
            )

    def covering_tree(i: int) -> int:
        t = covered_by[i]
        if t >= 0:
            return t
        e = em[i]
        for idx, st in enumerate(trees):
            if not e & ~st.em:
                covered_by[i] = idx
                return idx
        return -1

    def path_tree_degree(i: int, st: _TreeState) -> int:
        common = vm[i] & st.vm
        if not common:
            return 0
        if (em[i] & ~st.em).bit_count() != (vm[i] & ~st.vm).bit_count():
            return -1
        return common.bit_count()

    def best_tree_for_path(i: int) -> int:
        best, best_deg = -1, 0
        for idx, st in enumerate(trees):
            d = path_tree_degree(i, st)
            if d > best_deg:
                best, best_deg = idx, d
        return best

    def best_tree_for_pair(i: int, j: int) -> int:
        v = vm[i] | vm[j]
        e = em[i] | em[j]
        best, best_deg = -1, 0
        for idx, st in enumerate(trees):
            d = (vm[i] & st.vm).bit_count() + (vm[j] & st.vm).bit_count()
            if d <= best_deg:
                continue
            if (e & ~st.em).bit_count() != (v & ~st.vm).bit_count():
                continue
            best, best_deg = idx, d
        return best

    def insert(t: int, v: int, e: int) -> None:
        st = trees[t]
        st.vm |= v
        st.em |= e
        notify(t)

    def new_tree(v: int, e: int) -> int:
        trees.append(_TreeState(v, e))
        notify(len(trees) - 1)
        return len(trees) - 1

    # Phase 2: pairs of compatible paths.
    for s in seq:
        i, j = int(ai[s]), int(aj[s])
        ti, tj = covering_tree(i), covering_tree(j)
        if ti >= 0 and tj >= 0:
            continue
        if ti < 0 and tj < 0:
            t = best_tree_for_pair(i, j)
            if t >= 0:
                insert(t, vm[i] | vm[j], em[i] | em[j])
            else:
                t = new_tree(vm[i] | vm[j], em[i] | em[j])
                log["trees_from_pairs"] += 1
            covered_by[i] = covered_by[j] = t
            log["pairs_aggregated"] += 1
            continue
        p, t = (j, ti) if ti >= 0 else (i, tj)
        if path_tree_degree(p, trees[t]) <= 0:
            t = best_tree_for_path(p)
        if t < 0:
            log["pairs_postponed"] += 1
            continue
        insert(t, vm[p], em[p])
        covered_by[p] = t
        log["pairs_aggregated"] += 1

    # Phases 3 and 4: remaining single paths, longest first.
    singles = [i for i in range(n) if covering_tree(i) < 0]
    singles.sort(key=lambda i: (-length[i], rank[i]))
    log["singles"] = len(singles)
    for i in singles:
        if covering_tree(i) >= 0:
            continue
        t = best_tree_for_path(i)
        if t >= 0:
            insert(t, vm[i], em[i])
            log["singles_aggregated"] += 1
        else:
            t = new_tree(vm[i], em[i])
            log["trees_from_singles"] += 1
        covered_by[i] = t

    out = []
    for st in trees:
        members = tuple(i for i in range(n) if not em[i] & ~st.em)
        out.append(
            Tree(
                frozenset(_bits(st.vm)),
                frozenset(net.edges[b] for b in _bits(st.em)),
                members,
            )
        )
    log["trees"] = len(out)
    return AggregationResult(tuple(out), tuple(covered_by), log)
