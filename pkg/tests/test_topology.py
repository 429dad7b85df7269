import io

import networkx as nx
import pytest

import oracles
from pathtrees.graph import GraphError, Network, disjointness_degree
from pathtrees.selection import SelectionParams, select_all_pairs
from pathtrees.topology import (
    Kind,
    RegularSpec,
    TopologyParseError,
    all_best_paths,
    best_k,
    best_paths,
    dump_topology,
    generate,
    load_topology,
    min_tree_count,
    node_level,
    parse_topology,
    prune_degree_one,
    selection_params,
)

REGULAR = {
    # spec: (|V|, |E|, |N|, best paths, min trees)
    "full-mesh:12": (12, 66, 12, 726, 12),
    "ring:12": (12, 12, 12, 132, 12),
    "hier:2": (14, 24, 8, 152, 8),
    "hier:3": (30, 56, 16, 2352, 32),
    "clos:6": (12, 36, 6, 90, 6),
    "clos:12": (24, 144, 12, 792, 12),
}


class TestSpec:
    def test_parse(self):
        assert RegularSpec.parse("full-mesh:12") == RegularSpec(Kind.FULL_MESH, 12)
        assert RegularSpec.parse("hierarchical:3") == RegularSpec(Kind.HIERARCHICAL, 3)
        assert str(RegularSpec.parse(" clos : 6 ")) == "clos:6"

    @pytest.mark.parametrize("text", ["mesh", "star:4", "ring:x", "ring:2", "clos:1"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            RegularSpec.parse(text)


class TestGenerate:
    @pytest.mark.parametrize("spec", sorted(REGULAR))
    def test_counts(self, spec):
        s = RegularSpec.parse(spec)
        net = generate(s)
        nv, ne, nn, nbest, ntrees = REGULAR[spec]
        assert (net.n, net.n_edges, len(net.edge_nodes)) == (nv, ne, nn)
        assert len(all_best_paths(s)) == nbest
        assert min_tree_count(s) == ntrees
        assert set(net.adj[0].values()) == {1.0}

    @pytest.mark.parametrize("m", [2, 3])
    def test_hierarchy_has_two_parents_per_node(self, m):
        spec = RegularSpec(Kind.HIERARCHICAL, m)
        net = generate(spec)
        for v in range(net.n):
            lvl = node_level(spec, v)
            up = [u for u in net.adj[v] if node_level(spec, u) == lvl + 1]
            assert len(up) == (2 if lvl < m else 0)
            assert all(abs(node_level(spec, u) - lvl) == 1 for u in net.adj[v])


class TestBestPaths:
    def test_same_pod_pair(self):
        spec = RegularSpec(Kind.HIERARCHICAL, 2)
        assert len(best_paths(spec, 0, 1)) == 2
        assert best_k(spec, 0, 7) == 8

    @pytest.mark.parametrize("m", [2, 3])
    def test_valley_free(self, m):
        spec = RegularSpec(Kind.HIERARCHICAL, m)
        for p in all_best_paths(spec):
            levels = [node_level(spec, v) for v in p.nodes]
            top = levels.index(max(levels))
            assert all(b == a + 1 for a, b in zip(levels[:top], levels[1:top + 1]))
            assert all(b == a - 1 for a, b in zip(levels[top:], levels[top + 1:]))

    @pytest.mark.parametrize("spec", ["hier:2", "hier:3", "clos:6", "ring:7", "ring:8"])
    def test_shortest_path_families_match_networkx(self, spec):
        # In these families the best paths are all shortest paths (ring: both arcs).
        s = RegularSpec.parse(spec)
        net = generate(s)
        g = oracles.to_nx(net)
        for x, y in net.pairs():
            got = {p.nodes for p in best_paths(s, x, y)}
            if s.kind is Kind.RING:
                want = {tuple(p) for p in nx.all_simple_paths(g, x, y)}
            else:
                want = {tuple(p) for p in nx.all_shortest_paths(g, x, y)}
            assert got == want

    def test_full_mesh_shape(self):
        s = RegularSpec(Kind.FULL_MESH, 6)
        ps = best_paths(s, 1, 4)
        assert sorted(p.cost for p in ps) == [1, 2, 2, 2, 2]

    def test_clos_disjoint(self):
        s = RegularSpec(Kind.FOLDED_CLOS, 7)
        assert disjointness_degree(best_paths(s, 2, 5).paths) == 7

    def test_rejects_non_edge_pair(self):
        with pytest.raises(ValueError):
            best_paths(RegularSpec(Kind.FOLDED_CLOS, 3), 0, 4)

    @pytest.mark.parametrize("spec", ["full-mesh:7", "ring:9", "hier:2", "clos:5"])
    def test_selection_params_reproduce_best_paths(self, spec):
        s = RegularSpec.parse(spec)
        net = generate(s)
        k, h, f = selection_params(s)
        rep = select_all_pairs(net, SelectionParams(k, h, f))
        for r in rep.results:
            assert set(r.paths.paths) == set(best_paths(s, *r.pair).paths)


TRIANGLE = """\
# a triangle
node a edge
node b edge
node c   # interior
edge a b 1
edge b c 1
edge a c 1.5
"""


class TestFiles:
    def test_triangle(self):
        net = parse_topology(io.StringIO(TRIANGLE))
        assert net.n_edges == 3 and net.edge_nodes == (0, 1)
        assert net.weight(0, 2) == 1.5
        assert net.labels == ("a", "b", "c")

    @pytest.mark.parametrize(
        "text, line, msg",
        [
            ("node a edge\nnode b\nedge a b 1\nedge b a 2\n", 4, "duplicate edge"),
            ("node a edge\nedge a b 1\n", 2, "unknown node"),
            ("node a edge\nnode a\n", 2, "declared twice"),
            ("node a edge\nnode b\nedge a b 0\n", 3, "positive"),
            ("node a edge\nnode b\nedge a b x\n", 3, "bad weight"),
            ("node a edge\nnode b\nedge a a 1\n", 3, "self-loop"),
            ("node a core\n", 1, "node <id>"),
            ("link a b 1\n", 1, "unknown declaration"),
        ],
    )
    def test_errors_carry_line_numbers(self, text, line, msg):
        with pytest.raises(TopologyParseError, match=msg) as exc:
            parse_topology(io.StringIO(text))
        assert exc.value.line == line

    def test_disconnected_and_empty(self):
        with pytest.raises(GraphError, match="not connected"):
            parse_topology(io.StringIO("node a edge\nnode b edge\n"))
        with pytest.raises(TopologyParseError, match="no edge nodes"):
            parse_topology(io.StringIO("node a\nnode b\nedge a b 1\n"))
        with pytest.raises(TopologyParseError):
            parse_topology(io.StringIO("# nothing\n"))

    @pytest.mark.parametrize("spec", ["ring:12", "hier:2", "clos:4"])
    def test_round_trip(self, spec, tmp_path):
        net = generate(RegularSpec.parse(spec))
        path = tmp_path / "net.topo"
        path.write_text(dump_topology(net))
        back = load_topology(str(path))
        assert back == net
        assert nx.is_isomorphic(oracles.to_nx(back), oracles.to_nx(net))

    def test_stream_and_weights(self):
        net = Network(3, [(0, 1, 0.25), (1, 2, 3)], [0, 2], ["x", "y", "z"])
        text = dump_topology(net)
        assert "edge x y 0.25" in text and "edge y z 3" in text
        assert load_topology(io.StringIO(text)) == net


class TestPrune:
    def test_removes_chains(self):
        # Triangle 0-1-2 with a tail 2-3-4.
        net = Network(5, [(0, 1, 1), (1, 2, 1), (0, 2, 1), (2, 3, 1), (3, 4, 1)], [0, 4], list("abcde"))
        pruned = prune_degree_one(net)
        assert pruned.labels == ("a", "b", "c")
        assert pruned.edge_nodes == (0,)
        assert prune_degree_one(pruned) is pruned

    def test_tree_keeps_two_nodes(self):
        net = Network(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)], [0, 1, 2, 3])
        pruned = prune_degree_one(net)
        assert pruned.n == 2 and pruned.n_edges == 1

    def test_rejects_losing_all_edge_nodes(self):
        net = Network(4, [(0, 1, 1), (1, 2, 1), (0, 2, 1), (2, 3, 1)], [3])
        with pytest.raises(GraphError):
            prune_degree_one(net)

    def test_load_option(self):
        text = "node a edge\nnode b edge\nnode c edge\nnode d edge\n" \
               "edge a b 1\nedge b c 1\nedge a c 1\nedge c d 1\n"
        assert load_topology(io.StringIO(text), prune=True).n == 3
