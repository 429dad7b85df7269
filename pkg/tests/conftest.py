import os
import sys

import pytest
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from pathtrees.aggregation import Tree  # noqa: E402
from pathtrees.graph import Network  # noqa: E402


@st.composite
def networks(draw, min_nodes=3, max_nodes=8, max_extra=10, int_weights=True):
    """Random connected graph: a random spanning tree plus extra edges."""
    n = draw(st.integers(min_nodes, max_nodes))
    weight = st.integers(1, 4) if int_weights else st.floats(0.5, 5.0, allow_nan=False)
    edges = {}
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        edges[(u, v)] = draw(weight)
    others = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in edges]
    if others:
        extra = draw(st.lists(st.sampled_from(others), max_size=max_extra, unique=True))
        for e in extra:
            edges[e] = draw(weight)
    return Network(n, [(u, v, w) for (u, v), w in edges.items()], range(n))


@st.composite
def network_and_pair(draw, **kw):
    net = draw(networks(**kw))
    x = draw(st.integers(0, net.n - 2))
    y = draw(st.integers(x + 1, net.n - 1))
    return net, x, y


@st.composite
def random_trees(draw, max_nodes=12):
    """A random labelled tree given as (nodes, edges) over 0..n-1."""
    n = draw(st.integers(1, max_nodes))
    edges = set()
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        edges.add((u, v))
    perm = draw(st.permutations(list(range(n))))
    edges = {tuple(sorted((perm[u], perm[v]))) for u, v in edges}
    return Tree(frozenset(range(n)), frozenset(edges))


@pytest.fixture
def worked_example():
    """The five-path example set over nodes 1..6 (indices are label - 1)."""
    pairs = [(1, 2), (2, 4), (2, 3), (3, 5), (5, 4), (2, 6), (6, 4), (1, 3), (1, 5)]
    net = Network(6, [(a - 1, b - 1, 1) for a, b in pairs], range(6), [str(i) for i in range(1, 7)])

    def p(*labels):
        return net.path([net.node(str(v)) for v in labels])

    A = {
        "124": p(1, 2, 4),
        "12354": p(1, 2, 3, 5, 4),
        "1264": p(1, 2, 6, 4),
        "1324": p(1, 3, 2, 4),
        "154": p(1, 5, 4),
    }
    return net, A

