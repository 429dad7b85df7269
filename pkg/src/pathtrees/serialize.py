"""JSON files for path sets and tree sets, keyed by node labels."""

from __future__ import annotations

import json
from typing import IO, Any, Sequence

from .aggregation import Tree
from .graph import GraphError, Network, Path, edge_key


class FormatError(ValueError):
    pass


def _dump(doc: Any) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _read(source: str | IO[str]) -> Any:
    try:
        if isinstance(source, str):
            with open(source, encoding="utf-8") as fh:
                return json.load(fh)
        return json.load(source)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc}") from None


def _index(net: Network, label: Any) -> int:
    try:
        return net.node(str(label))
    except KeyError:
        raise FormatError(f"unknown node {label!r}") from None


def paths_to_json(net: Network, paths: Sequence[Path]) -> str:
    lab = net.labels
    return _dump({"paths": [{"nodes": [lab[v] for v in p.nodes], "cost": p.cost} for p in paths]})


def load_paths(net: Network, source: str | IO[str]) -> list[Path]:
    doc = _read(source)
    if not isinstance(doc, dict) or not isinstance(doc.get("paths"), list):
        raise FormatError("expected an object with a 'paths' list")
    out = []
    for i, entry in enumerate(doc["paths"]):
        nodes = entry.get("nodes") if isinstance(entry, dict) else entry
        if not isinstance(nodes, list):
            raise FormatError(f"path {i}: expected a list of node labels")
        try:
            out.append(net.path([_index(net, v) for v in nodes]))
        except GraphError as exc:
            raise FormatError(f"path {i}: {exc}") from None
    if len(set(out)) != len(out):
        raise FormatError("duplicate paths")
    return out


def trees_to_json(net: Network, trees: Sequence[Tree]) -> str:
    lab = net.labels
    doc = {
        "trees": [
            {
                "nodes": [lab[v] for v in sorted(t.nodes)],
                "edges": [[lab[u], lab[v]] for u, v in sorted(t.edges)],
                "paths": list(t.covered_paths),
            }
            for t in trees
        ]
    }
    return _dump(doc)


def load_trees(net: Network, source: str | IO[str]) -> list[Tree]:
    doc = _read(source)
    if not isinstance(doc, dict) or not isinstance(doc.get("trees"), list):
        raise FormatError("expected an object with a 'trees' list")
    out = []
    for i, entry in enumerate(doc["trees"]):
        try:
            nodes = frozenset(_index(net, v) for v in entry["nodes"])
            edges = []
            for a, b in entry["edges"]:
                u, v = _index(net, a), _index(net, b)
                if v not in net.adj[u]:
                    raise FormatError(f"tree {i}: {a}-{b} is not a network edge")
                edges.append(edge_key(u, v))
            if any(u not in nodes or v not in nodes for u, v in edges):
                raise FormatError(f"tree {i}: edge endpoint missing from node list")
            out.append(Tree(nodes, frozenset(edges), tuple(entry.get("paths", ()))))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"tree {i}: {exc}") from None
    return out
