"""Selection of k short, maximally edge-disjoint paths per edge-node pair."""

from __future__ import annotations

import enum
import logging
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import fmean
from typing import Iterable, Sequence

from .graph import (
    Network,
    Path,
    PathSet,
    canonical,
    count_simple_paths,
    disjointness_degree,
    enumerate_interesting_paths,
    enumerate_min_cost_paths,
    k_cheapest_paths,
    max_independent_set,
    sharing,
    shortest_path_avoiding,
)

log = logging.getLogger(__name__)

F_STEP = 0.25
F_CAP = 10.0


class Flag(str, enum.Enum):
    FEWER_THAN_K = "FEWER_THAN_K"
    PARAMS_ADJUSTED = "PARAMS_ADJUSTED"
    EXTRA_DISJOINT_ADDED = "EXTRA_DISJOINT_ADDED"
    NO_DISJOINT_PAIR_EXISTS = "NO_DISJOINT_PAIR_EXISTS"


@dataclass(frozen=True)
class SelectionParams:
    k: int
    h: int = 0
    f: float = 1.0
    threshold: int | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.h < 0:
            raise ValueError("h must be non-negative")
        if self.f < 1:
            raise ValueError("f must be at least 1")
        if self.threshold is not None and self.threshold < self.k:
            raise ValueError("threshold must be at least k")


@dataclass(frozen=True)
class SelectionResult:
    pair: tuple[int, int]
    paths: PathSet
    disjointness: int
    flags: frozenset[Flag]
    effective_h: int
    effective_f: float
    optimal: Path
    search_set_size: int
    k: int
    extra: Path | None = None
    elapsed: float = field(default=0.0, compare=False)

    @property
    def hop_stretch(self) -> float:
        o = self.optimal.length
        return fmean(p.length - o for p in self.paths)

    @property
    def cost_stretch(self) -> float:
        o = self.optimal.cost
        return fmean(p.cost - o for p in self.paths)


@dataclass(frozen=True)
class SelectionReport:
    results: tuple[SelectionResult, ...]
    k: int

    @property
    def n_pairs(self) -> int:
        return len(self.results)

    @property
    def total_paths(self) -> int:
        return sum(len(r.paths) for r in self.results)

    @property
    def avg_hop_stretch(self) -> float:
        return fmean(r.hop_stretch for r in self.results) if self.results else 0.0

    @property
    def avg_cost_stretch(self) -> float:
        return fmean(r.cost_stretch for r in self.results) if self.results else 0.0

    def disjointness_distribution(self) -> dict[str, float]:
        """Percentage of pairs whose set has disjointness 1, 2 and 3 or more."""
        n = self.n_pairs or 1
        c = Counter(min(r.disjointness, 3) for r in self.results)
        return {"1": 100.0 * c[1] / n, "2": 100.0 * c[2] / n, ">=3": 100.0 * c[3] / n}

    @property
    def pairs_below_k(self) -> int:
        return sum(1 for r in self.results if len(r.paths) < r.k)

    @property
    def all_paths(self) -> list[Path]:
        return [p for r in self.results for p in r.paths]

    def timings(self) -> dict[str, float]:
        t = [r.elapsed for r in self.results]
        if not t:
            return {"total": 0.0, "mean": 0.0, "max": 0.0}
        return {"total": sum(t), "mean": fmean(t), "max": max(t)}


def _edge_ids(paths: Iterable[Path]) -> dict:
    ids: dict = {}
    for p in paths:
        for e in p.edge_list():
            ids.setdefault(e, len(ids))
    return ids


def best_subset(
    candidates: Sequence[Path], n: int, fixed: Sequence[Path] = ()
) -> list[Path]:
    """Choose ``n`` candidates maximising disjointness of the union with
    ``fixed``, then minimising its sharing.

    Exhaustive branch and bound over n-subsets in canonical candidate order;
    among equally good subsets the lexicographically first one wins.
    """
    cands = canonical(candidates)
    fixed = list(fixed)
    if n < 0 or n > len(cands):
        raise ValueError(f"cannot choose {n} of {len(cands)} candidates")
    if set(cands) & set(fixed):
        raise ValueError("candidates and fixed paths overlap")
    if n == 0:
        return []
    if n == len(cands):
        return cands

    m = len(cands)
    nf = len(fixed)
    base = n + nf + 1
    ids = _edge_ids(fixed + cands)
    # Items 0..nf-1 are the fixed paths, nf.. the candidates.
    items = fixed + cands
    edges = [[ids[e] for e in p.edge_list()] for p in items]
    masks = []
    for es in edges:
        mk = 0
        for e in es:
            mk |= 1 << e
        masks.append(mk)
    conflicts = [0] * len(items)
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if masks[i] & masks[j]:
                conflicts[i] |= 1 << j
                conflicts[j] |= 1 << i

    occ = [0] * len(ids)
    current_sharing = 0
    for i in range(nf):
        for e in edges[i]:
            c = occ[e]
            current_sharing += (base ** (c + 1) if c + 1 >= 2 else 0) - (base**c if c >= 2 else 0)
            occ[e] = c + 1

    # Upper bound on any achievable disjointness.
    ceiling = min(n + nf, max_independent_set(conflicts))

    best_disj = -1
    best_sharing = 0
    best: tuple[int, ...] | None = None
    chosen: list[int] = []
    fixed_mask = (1 << nf) - 1

    def disj_of(sel_mask: int) -> int:
        return max_independent_set(conflicts, sel_mask)

    def add(i: int) -> int:
        delta = 0
        for e in edges[i]:
            c = occ[e]
            if c >= 1:
                delta += base ** (c + 1) - (base**c if c >= 2 else 0)
            occ[e] = c + 1
        return delta

    def remove(i: int) -> None:
        for e in edges[i]:
            occ[e] -= 1

    def search(start: int, sel_mask: int, shr: int) -> bool:
        """Returns True once the search can stop entirely."""
        nonlocal best_disj, best_sharing, best
        picked = len(chosen)
        if picked == n:
            d = disj_of(sel_mask)
            if d > best_disj or (d == best_disj and shr < best_sharing):
                best_disj, best_sharing, best = d, shr, tuple(chosen)
            return best_disj == ceiling and best_sharing == 0
        remaining = n - picked
        upper = min(ceiling, disj_of(sel_mask) + remaining)
        if upper < best_disj or (upper == best_disj and shr >= best_sharing):
            return False
        for i in range(start, m - remaining + 1):
            # Sharing never decreases along a branch, so siblings are bounded by shr too.
            if best is not None and (
                upper < best_disj or (upper == best_disj and shr >= best_sharing)
            ):
                break
            item = nf + i
            delta = add(item)
            chosen.append(i)
            nshr = shr + delta
            stop = False
            if best is None or nshr < best_sharing or upper > best_disj:
                stop = search(i + 1, sel_mask | (1 << item), nshr)
            chosen.pop()
            remove(item)
            if stop:
                return True
        return False

    search(0, fixed_mask, current_sharing)
    assert best is not None
    return [cands[i] for i in best]


def _validate_pair(net: Network, x: int, y: int) -> None:
    if x >= y:
        raise ValueError(f"pair ({x}, {y}) must satisfy x < y")
    if x not in net.edge_nodes or y not in net.edge_nodes:
        raise ValueError(f"({x}, {y}) is not a pair of edge nodes")


def _choose(
    mincost: list[Path], interesting: list[Path] | None, k: int
) -> tuple[list[Path], bool]:
    """The three cases of the selection rule. Returns (paths, fewer_than_k)."""
    if len(mincost) >= k:
        return best_subset(mincost, k, ()), False
    assert interesting is not None
    if len(interesting) <= k:
        return list(interesting), len(interesting) < k
    cset = set(mincost)
    rest = [p for p in interesting if p not in cset]
    return list(mincost) + best_subset(rest, k - len(mincost), mincost), False


def select_paths(net: Network, x: int, y: int, params: SelectionParams) -> SelectionResult:
    """Select paths for one pair with fixed hop slack ``h`` and stretch ``f``."""
    _validate_pair(net, x, y)
    t0 = time.perf_counter()
    k = params.k
    mincost, optimal = enumerate_min_cost_paths(net, x, y)
    interesting = None
    if len(mincost) < k:
        interesting = enumerate_interesting_paths(net, x, y, params.h, params.f)
    chosen, fewer = _choose(mincost, interesting, k)
    paths = canonical(chosen)
    return SelectionResult(
        pair=(x, y),
        paths=PathSet(x, y, tuple(paths)),
        disjointness=disjointness_degree(paths),
        flags=frozenset({Flag.FEWER_THAN_K} if fewer else ()),
        effective_h=params.h,
        effective_f=params.f,
        optimal=optimal,
        search_set_size=len(interesting) if interesting is not None else len(mincost),
        k=k,
        elapsed=time.perf_counter() - t0,
    )


def _grow(
    net: Network,
    x: int,
    y: int,
    k: int,
    h: int,
    f: float,
    interesting: list[Path],
    optimal: Path,
) -> tuple[int, float, list[Path]]:
    """Loosen h and f alternately until k paths are in the search set."""
    h_cap = max(h, net.n - 2)
    f_cap = max(f, F_CAP)
    turn_h = True
    while len(interesting) < k and (h < h_cap or f < f_cap):
        if (turn_h and h < h_cap) or f >= f_cap:
            h += 1
        else:
            f = min(f_cap, f + F_STEP)
        turn_h = not turn_h
        interesting = enumerate_interesting_paths(net, x, y, h, f)
    if len(interesting) < k and count_simple_paths(net, x, y, k) >= k:
        # Schedule exhausted: open the bounds just enough for the k cheapest paths.
        cheapest = k_cheapest_paths(net, x, y, k)
        h = max(h, max(p.length for p in cheapest) - optimal.length)
        f = max(f, max(p.cost for p in cheapest) / optimal.cost)
        interesting = enumerate_interesting_paths(net, x, y, h, f)
    return h, f, interesting


def select_paths_adaptive(
    net: Network, x: int, y: int, params: SelectionParams
) -> SelectionResult:
    """Selection with a search-set size threshold, automatic adjustment of
    h and f, and repair of sets whose disjointness degree is one."""
    if params.threshold is None:
        raise ValueError("adaptive selection needs a threshold")
    _validate_pair(net, x, y)
    t0 = time.perf_counter()
    k, h, f = params.k, params.h, params.f
    flags: set[Flag] = set()
    mincost, optimal = enumerate_min_cost_paths(net, x, y)
    interesting = None
    if len(mincost) < k:
        interesting = enumerate_interesting_paths(net, x, y, h, f)
        while len(interesting) > params.threshold and (h > 0 or f > 1):
            nh, nf = (h - 1, f) if h > 0 else (h, max(1.0, f - F_STEP))
            smaller = enumerate_interesting_paths(net, x, y, nh, nf)
            if len(smaller) < k:
                break
            h, f, interesting = nh, nf, smaller
            flags.add(Flag.PARAMS_ADJUSTED)
        if len(interesting) < k and count_simple_paths(net, x, y, len(interesting) + 1) > len(
            interesting
        ):
            h, f, interesting = _grow(net, x, y, k, h, f, interesting, optimal)
            flags.add(Flag.PARAMS_ADJUSTED)
    chosen, fewer = _choose(mincost, interesting, k)
    if fewer:
        flags.add(Flag.FEWER_THAN_K)
    disj = disjointness_degree(chosen)
    extra = None
    if disj == 1:
        used = {e for p in chosen for e in p.edge_list()}
        extra = shortest_path_avoiding(net, x, y, used)
        if extra is None:
            flags.add(Flag.NO_DISJOINT_PAIR_EXISTS)
        else:
            chosen = chosen + [extra]
            disj = 2
            flags.add(Flag.EXTRA_DISJOINT_ADDED)
    if flags - {Flag.PARAMS_ADJUSTED}:
        log.info("pair (%d, %d): %s", x, y, ", ".join(sorted(fl.value for fl in flags)))
    paths = canonical(chosen)
    return SelectionResult(
        pair=(x, y),
        paths=PathSet(x, y, tuple(paths)),
        disjointness=disj,
        flags=frozenset(flags),
        effective_h=h,
        effective_f=f,
        optimal=optimal,
        search_set_size=len(interesting) if interesting is not None else len(mincost),
        k=k,
        extra=extra,
        elapsed=time.perf_counter() - t0,
    )


def _run_pair(args: tuple[Network, int, int, SelectionParams]) -> SelectionResult:
    net, x, y, params = args
    if params.threshold is None:
        return select_paths(net, x, y, params)
    return select_paths_adaptive(net, x, y, params)


def select_all_pairs(
    net: Network,
    params: SelectionParams,
    jobs: int = 1,
    k_for_pair=None,
) -> SelectionReport:
    """Run selection for every edge-node pair x < y.

    Without a threshold every pair uses the fixed-parameter rule; with one,
    the adaptive variant. ``k_for_pair(x, y)`` may override k per pair.
    """
    if len(net.edge_nodes) < 2:
        raise ValueError("need at least two edge nodes")
    tasks = []
    for x, y in net.pairs():
        p = params
        if k_for_pair is not None:
            kk = k_for_pair(x, y)
            p = SelectionParams(kk, params.h, params.f, params.threshold and max(params.threshold, kk))
        tasks.append((net, x, y, p))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_pair, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_run_pair(t) for t in tasks]
    return SelectionReport(tuple(results), params.k)
