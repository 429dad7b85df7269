import itertools

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import network_and_pair, networks
from pathtrees.graph import Network, disjointness_degree, sharing
from pathtrees.selection import (
    Flag,
    SelectionParams,
    best_subset,
    select_all_pairs,
    select_paths,
    select_paths_adaptive,
)
from pathtrees.topology import Kind, RegularSpec, generate


def nodes_of(paths):
    return [p.nodes for p in paths]


class TestParams:
    @pytest.mark.parametrize(
        "kw",
        [dict(k=0), dict(k=2, h=-1), dict(k=2, f=0.9), dict(k=4, threshold=3)],
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SelectionParams(**kw)

    def test_valid(self):
        p = SelectionParams(4, 2, 1.5, 4)
        assert (p.k, p.h, p.f, p.threshold) == (4, 2, 1.5, 4)


class TestBestSubset:
    def test_example_prefers_lower_sharing(self, worked_example):
        _, A = worked_example
        r = best_subset(list(A.values()), 4)
        assert disjointness_degree(r) == 3
        assert sharing(r) == 50
        assert set(r) == {A["124"], A["1264"], A["1324"], A["154"]}

    def test_zero(self, worked_example):
        _, A = worked_example
        assert best_subset(list(A.values()), 0) == []

    def test_all(self, worked_example):
        _, A = worked_example
        assert len(best_subset(list(A.values()), 5)) == 5

    def test_rejects_bad_input(self, worked_example):
        _, A = worked_example
        with pytest.raises(ValueError):
            best_subset(list(A.values()), 6)
        with pytest.raises(ValueError):
            best_subset([A["124"], A["154"]], 1, [A["124"]])

    @settings(max_examples=150, deadline=None)
    @given(networks(min_nodes=5, max_nodes=8, max_extra=14), st.data())
    def test_matches_exhaustive_oracle(self, net, data):
        g = oracles.to_nx(net)
        x = data.draw(st.integers(0, net.n - 2))
        y = data.draw(st.integers(x + 1, net.n - 1))
        pool = sorted(tuple(p) for p in nx.all_simple_paths(g, x, y))
        cand = data.draw(st.lists(st.sampled_from(pool), min_size=1, max_size=7, unique=True))
        rest = [p for p in pool if p not in cand]
        fixed = data.draw(st.lists(st.sampled_from(rest), max_size=2, unique=True)) if rest else []
        n = data.draw(st.integers(0, len(cand)))
        got = best_subset([net.path(p) for p in cand], n, [net.path(p) for p in fixed])
        want = oracles.best_subset(oracles.canonical_order(net, cand), n, fixed)
        assert nodes_of(got) == want


class TestSelectPaths:
    def test_full_mesh(self):
        net = generate(RegularSpec(Kind.FULL_MESH, 12))
        r = select_paths(net, 0, 5, SelectionParams(11, 1, 2.0))
        assert len(r.paths) == 11
        assert sorted(p.length for p in r.paths) == [1] + [2] * 10
        assert not r.flags

    def test_ring(self):
        net = generate(RegularSpec(Kind.RING, 12))
        r = select_paths(net, 2, 7, SelectionParams(2, 10, 11.0))
        assert nodes_of(r.paths) == [(2, 3, 4, 5, 6, 7), (2, 1, 0, 11, 10, 9, 8, 7)]
        assert r.disjointness == 2

    def test_clos(self):
        net = generate(RegularSpec(Kind.FOLDED_CLOS, 6))
        r = select_paths(net, 1, 4, SelectionParams(6, 0, 1.0))
        assert len(r.paths) == 6 and r.disjointness == 6

    def test_fewer_than_k(self):
        net = generate(RegularSpec(Kind.RING, 6))
        r = select_paths(net, 0, 3, SelectionParams(4, 0, 1.0))
        assert len(r.paths) == 2
        assert r.flags == {Flag.FEWER_THAN_K}

    def test_pair_order_and_membership(self):
        net = Network(3, [(0, 1, 1), (1, 2, 1)], [0, 2])
        with pytest.raises(ValueError):
            select_paths(net, 2, 0, SelectionParams(1))
        with pytest.raises(ValueError):
            select_paths(net, 0, 1, SelectionParams(1))

    @settings(max_examples=120, deadline=None)
    @given(network_and_pair(max_nodes=7), st.integers(1, 5), st.integers(0, 3),
           st.sampled_from([1.0, 1.5, 2.0, 3.0]))
    def test_matches_oracle(self, case, k, h, f):
        net, x, y = case
        r = select_paths(net, x, y, SelectionParams(k, h, f))
        want = oracles.select(net, x, y, k, h, f)
        assert set(nodes_of(r.paths)) == set(want)
        assert r.disjointness == oracles.disjointness(want)
        assert (Flag.FEWER_THAN_K in r.flags) == (len(want) < k)
        mc = set(oracles.min_cost_paths(net, x, y))
        if len(mc) <= k:
            assert mc <= set(nodes_of(r.paths))


def bridge_graph():
    """Two 4-cliques joined by the single edge 3-4."""
    edges = [(u, v, 1) for u, v in itertools.combinations(range(4), 2)]
    edges += [(u, v, 1) for u, v in itertools.combinations(range(4, 8), 2)]
    edges.append((3, 4, 1))
    return Network(8, edges, range(8))


class TestAdaptive:
    def test_needs_threshold(self):
        net = generate(RegularSpec(Kind.RING, 5))
        with pytest.raises(ValueError):
            select_paths_adaptive(net, 0, 2, SelectionParams(2))

    def test_noop_when_set_fits(self):
        net = generate(RegularSpec(Kind.FOLDED_CLOS, 6))
        plain = select_paths(net, 0, 3, SelectionParams(6, 0, 1.0))
        adaptive = select_paths_adaptive(net, 0, 3, SelectionParams(6, 0, 1.0, threshold=20))
        assert adaptive.paths == plain.paths
        assert adaptive.flags == frozenset()
        assert (adaptive.effective_h, adaptive.effective_f) == (0, 1.0)

    def test_bridge_has_no_disjoint_pair(self):
        net = bridge_graph()
        r = select_paths_adaptive(net, 0, 7, SelectionParams(4, 2, 2.0, threshold=50))
        assert r.disjointness == 1
        assert Flag.NO_DISJOINT_PAIR_EXISTS in r.flags
        assert Flag.EXTRA_DISJOINT_ADDED not in r.flags
        assert len(r.paths) == 4

    def test_extra_disjoint_path_ignores_f(self):
        # Two cheap paths share edge 0-1; the only disjoint detour costs 30.
        edges = [(0, 1, 1), (1, 2, 1), (2, 3, 1), (1, 4, 1), (4, 3, 1), (0, 5, 10), (5, 6, 10), (6, 3, 10)]
        net = Network(7, edges, range(7))
        params = SelectionParams(2, 0, 1.0, threshold=10)
        r = select_paths_adaptive(net, 0, 3, params)
        assert Flag.EXTRA_DISJOINT_ADDED in r.flags
        assert len(r.paths) == params.k + 1
        assert r.disjointness >= 2
        assert r.extra.nodes == (0, 5, 6, 3)
        assert r.extra.cost > r.effective_f * r.optimal.cost
        # Oracle: cheapest simple path avoiding every edge of the base set.
        base = [p for p in r.paths if p != r.extra]
        used = {e for p in base for e in p.edges}
        alts = [p for p in oracles.all_paths(net, 0, 3) if not set(oracles.path_edges(p[2])) & used]
        assert r.extra.cost == alts[0][0]

    def test_shrinks_large_search_set(self):
        net = generate(RegularSpec(Kind.FULL_MESH, 7))
        params = SelectionParams(3, 3, 4.0, threshold=6)
        r = select_paths_adaptive(net, 0, 1, params)
        assert Flag.PARAMS_ADJUSTED in r.flags
        assert r.search_set_size <= 6
        assert (r.effective_h, r.effective_f) < (3, 4.0)
        assert len(r.paths) == 3

    def test_grows_small_search_set(self):
        net = generate(RegularSpec(Kind.RING, 8))
        r = select_paths_adaptive(net, 0, 2, SelectionParams(2, 0, 1.0, threshold=10))
        assert Flag.PARAMS_ADJUSTED in r.flags
        assert len(r.paths) == 2
        assert r.effective_h >= 4 and r.effective_f >= 3.0
        for p in r.paths:
            assert p.length <= r.optimal.length + r.effective_h
            assert p.cost <= r.effective_f * r.optimal.cost + 1e-9

    def test_no_growth_without_more_paths(self):
        net = Network(3, [(0, 1, 1), (1, 2, 1)], [0, 2])
        r = select_paths_adaptive(net, 0, 2, SelectionParams(2, 0, 1.0, threshold=5))
        assert r.flags == {Flag.FEWER_THAN_K, Flag.NO_DISJOINT_PAIR_EXISTS}
        assert len(r.paths) == 1

    @settings(max_examples=80, deadline=None)
    @given(network_and_pair(max_nodes=7), st.integers(1, 4), st.integers(0, 2))
    def test_invariants(self, case, k, h):
        net, x, y = case
        r = select_paths_adaptive(net, x, y, SelectionParams(k, h, 1.5, threshold=max(k, 8)))
        total = len(oracles.all_paths(net, x, y))
        assert len(r.paths) <= k + 1
        if total >= k:
            assert len(r.paths) >= k
        if Flag.FEWER_THAN_K in r.flags:
            assert len(r.paths) < k
        if Flag.EXTRA_DISJOINT_ADDED in r.flags:
            assert len(r.paths) == k + 1 and r.disjointness >= 2
        assert r.disjointness == oracles.disjointness(nodes_of(r.paths))
        for p in r.paths:
            if p == r.extra:
                continue
            assert p.cost <= r.effective_f * r.optimal.cost * (1 + 1e-9)
            # Min-cost paths belong to the search set whatever their length.
            if p.cost > r.optimal.cost * (1 + 1e-9):
                assert p.length <= r.optimal.length + r.effective_h


class TestAllPairs:
    def test_full_mesh_total(self):
        net = generate(RegularSpec(Kind.FULL_MESH, 12))
        rep = select_all_pairs(net, SelectionParams(11, 1, 2.0))
        assert rep.total_paths == 726
        assert rep.pairs_below_k == 0

    def test_small_ring(self):
        net = generate(RegularSpec(Kind.RING, 5))
        rep = select_all_pairs(net, SelectionParams(2, 3, 4.0))
        assert rep.n_pairs == 10 and rep.total_paths == 20

    def test_report_aggregates(self):
        net = generate(RegularSpec(Kind.RING, 6))
        rep = select_all_pairs(net, SelectionParams(3, 4, 5.0))
        rs = rep.results
        assert rep.pairs_below_k == sum(len(r.paths) < 3 for r in rs)
        hop = [sum(p.length - r.optimal.length for p in r.paths) / len(r.paths) for r in rs]
        assert rep.avg_hop_stretch == pytest.approx(sum(hop) / len(hop))
        dist = rep.disjointness_distribution()
        assert sum(dist.values()) == pytest.approx(100.0)
        assert dist["2"] == 100.0
        t = rep.timings()
        assert t["max"] >= t["mean"] >= 0

    def test_per_pair_k(self):
        spec = RegularSpec(Kind.HIERARCHICAL, 2)
        net = generate(spec)
        rep = select_all_pairs(net, SelectionParams(8, 0, 1.0), k_for_pair=lambda x, y: 2 if y - x == 1 else 8)
        assert {r.k for r in rep.results} == {2, 8}

    def test_parallel_matches_serial(self):
        net = generate(RegularSpec(Kind.RING, 7))
        params = SelectionParams(2, 1, 2.0, threshold=4)
        assert select_all_pairs(net, params) == select_all_pairs(net, params, jobs=2)

    def test_needs_two_edge_nodes(self):
        net = Network(2, [(0, 1, 1)], [0])
        with pytest.raises(ValueError):
            select_all_pairs(net, SelectionParams(1))
