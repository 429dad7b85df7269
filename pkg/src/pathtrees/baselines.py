"""SPAIN baselines: greedy edge-inflation path selection and randomized
aggregation of paths into acyclic (possibly disconnected) subgraphs."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import Edge, Network, Path, PathSet, _check_pair, _unwind, dijkstra


def spain_select(net: Network, x: int, y: int, k: int) -> PathSet:
    """Up to k paths from x to y by repeated shortest path with cost inflation.

    After each path, every one of its edges is made more expensive by the
    sum of all original edge weights. Stops at k paths or as soon as a path
    repeats; Dijkstra ties go to the lowest node index.
    """
    _check_pair(net, x, y)
    if k < 1:
        raise ValueError("k must be at least 1")
    weights: dict[Edge, float] = {e: net.adj[e[0]][e[1]] for e in net.edges}
    bump = net.total_weight()
    found: list[Path] = []
    seen: set[tuple[int, ...]] = set()
    while len(found) < k:
        _, _, pred = dijkstra(net, x, weights=weights, hop_tiebreak=False)
        nodes = tuple(_unwind(pred, x, y))
        if nodes in seen:
            break
        seen.add(nodes)
        p = net.path(nodes)
        found.append(p)
        for e in p.edge_list():
            weights[e] += bump
    return PathSet(x, y, tuple(found))


class _Forest:
    """Acyclic edge set with a union-find over its node components."""

    __slots__ = ("em", "parent")

    def __init__(self) -> None:
        self.em = 0
        self.parent: dict[int, int] = {}

    def find(self, v: int) -> int:
        parent = self.parent
        root = v
        while parent.get(root, root) != root:
            root = parent[root]
        while v != root:
            nxt = parent[v]
            parent[v] = root
            v = nxt
        return root

    def accepts(self, edges: Sequence[tuple[int, int, int]]) -> bool:
        """Whether adding the (u, v, bit) edges keeps the graph acyclic."""
        extra: dict[int, int] = {}

        def root(v: int) -> int:
            r = self.find(v)
            while r in extra:
                r = extra[r]
            return r

        for u, v, bit in edges:
            if self.em & bit:
                continue
            ru, rv = root(u), root(v)
            if ru == rv:
                return False
            extra[ru] = rv
        return True

    def add(self, edges: Sequence[tuple[int, int, int]]) -> None:
        for u, v, bit in edges:
            if self.em & bit:
                continue
            self.em |= bit
            ru, rv = self.find(u), self.find(v)
            if ru != rv:
                self.parent[ru] = rv


@dataclass(frozen=True)
class SpainAggregationRun:
    seed: int
    subgraphs: tuple[frozenset[Edge], ...]
    iterations_executed: int
    best_size: int
    best_iteration: int = 0


def _prepare(net: Network, paths: Sequence[Path]) -> list[tuple[int, list[tuple[int, int, int]]]]:
    eidx = net.edge_index
    out = []
    for p in paths:
        net.path(p.nodes)
        es = [(u, v, 1 << eidx[(u, v)]) for u, v in p.edge_list()]
        mask = 0
        for _, _, b in es:
            mask |= b
        out.append((mask, es))
    return out


def _aggregate_once(prepared, seed: int) -> list[int]:
    rng = np.random.Generator(np.random.PCG64(seed))
    forests: list[_Forest] = []
    for idx in rng.permutation(len(prepared)):
        mask, es = prepared[idx]
        if any(not mask & ~g.em for g in forests):
            continue
        target = None
        for j in rng.permutation(len(forests)):
            if forests[j].accepts(es):
                target = forests[j]
                break
        if target is None:
            target = _Forest()
            forests.append(target)
        target.add(es)
    return [g.em for g in forests]


def _masks_to_edges(net: Network, masks: Sequence[int]) -> tuple[frozenset[Edge], ...]:
    out = []
    for m in masks:
        es = []
        while m:
            low = m & -m
            es.append(net.edges[low.bit_length() - 1])
            m ^= low
        out.append(frozenset(es))
    return tuple(out)


def spain_aggregate_once(net: Network, paths: Sequence[Path], seed: int) -> SpainAggregationRun:
    """One randomized pass: paths in a seeded random order, each inserted
    into the first acyclic-compatible subgraph of a fresh random scan."""
    masks = _aggregate_once(_prepare(net, paths), seed)
    return SpainAggregationRun(seed, _masks_to_edges(net, masks), 1, len(masks))


def _sizes(args) -> list[tuple[int, int]]:
    prepared, seeds = args
    return [(len(_aggregate_once(prepared, s)), s) for s in seeds]


def spain_aggregate_best(
    net: Network,
    paths: Sequence[Path],
    base_seed: int = 0,
    iterations: int | None = None,
    seconds: float | None = None,
    jobs: int = 1,
) -> SpainAggregationRun:
    """Repeat randomized aggregation and keep the smallest result.

    Iteration i uses seed ``base_seed + i``. The budget is an iteration
    count or a limit in process CPU seconds (at least one iteration runs).
    Ties go to the earliest iteration.
    """
    if (iterations is None) == (seconds is None):
        raise ValueError("give exactly one of iterations or seconds")
    if (iterations is not None and iterations < 1) or (seconds is not None and seconds <= 0):
        raise ValueError("budget must be positive")
    prepared = _prepare(net, paths)
    results: list[tuple[int, int]] = []
    if iterations is not None:
        seeds = [base_seed + i for i in range(iterations)]
        if jobs > 1:
            chunks = [seeds[i::jobs] for i in range(jobs)]
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for part in pool.map(_sizes, [(prepared, c) for c in chunks]):
                    results.extend(part)
        else:
            results = _sizes((prepared, seeds))
    else:
        start = time.process_time()
        i = 0
        while True:
            results.append((len(_aggregate_once(prepared, base_seed + i)), base_seed + i))
            i += 1
            if time.process_time() - start >= seconds:
                break
    size, seed = min(results)
    masks = _aggregate_once(prepared, seed)
    return SpainAggregationRun(
        seed, _masks_to_edges(net, masks), len(results), size, seed - base_seed
    )
