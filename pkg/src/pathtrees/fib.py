"""Forwarding state for a set of trees: VLAN port maps and hierarchical
prefix plans with static routes resolved by longest-prefix match."""

from __future__ import annotations

import ipaddress
import json
from dataclasses import dataclass
from ipaddress import IPv4Address, IPv4Network
from typing import Sequence

from .aggregation import Tree
from .graph import Network

DEFAULT_SPACE = IPv4Network("10.0.0.0/8")


# -- VLANs -------------------------------------------------------------------

@dataclass(frozen=True)
class VlanConfig:
    """``ports[switch][tag]`` lists the neighbours reached over tree edges."""

    ports: dict[int, dict[int, tuple[int, ...]]]
    n_tags: int

    def tag_edges(self, tag: int) -> frozenset[tuple[int, int]]:
        return frozenset(
            (min(s, p), max(s, p))
            for s, tags in self.ports.items()
            for p in tags.get(tag, ())
        )


def emit_vlan(trees: Sequence[Tree]) -> VlanConfig:
    """One VLAN per tree, tags numbered from 1 in tree order."""
    ports: dict[int, dict[int, list[int]]] = {}
    for tag, t in enumerate(trees, 1):
        for u, v in t.edges:
            ports.setdefault(u, {}).setdefault(tag, []).append(v)
            ports.setdefault(v, {}).setdefault(tag, []).append(u)
    frozen = {
        s: {tag: tuple(sorted(ps)) for tag, ps in sorted(tags.items())}
        for s, tags in sorted(ports.items())
    }
    return VlanConfig(frozen, len(trees))


# -- prefix plans ------------------------------------------------------------

class AddressSpaceError(ValueError):
    def __init__(self, required: list[int], space: IPv4Network) -> None:
        self.required = required
        lens = ", ".join(f"tree {i}: /{p}" for i, p in enumerate(required))
        super().__init__(f"trees do not fit in {space}; minimal prefix lengths: {lens}")


class LpmError(LookupError):
    def __init__(self, node: int, address: IPv4Address, reason: str = "no matching route") -> None:
        self.node = node
        self.address = address
        super().__init__(f"node {node}: {reason} for {address}")


@dataclass(frozen=True)
class Route:
    prefix: IPv4Network
    via: int
    tree: int


@dataclass(frozen=True)
class TreePlan:
    root: int
    prefix: IPv4Network
    parent: dict[int, int | None]
    node_prefix: dict[int, IPv4Network]
    address: dict[int, IPv4Address]


@dataclass(frozen=True)
class PrefixPlan:
    trees: tuple[TreePlan, ...]
    routes: dict[int, tuple[Route, ...]]
    addresses: dict[int, tuple[IPv4Address, ...]]

    def owner(self, address: IPv4Address) -> int | None:
        for node, addrs in self.addresses.items():
            if address in addrs:
                return node
        return None


def _adjacency(tree: Tree) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = {v: [] for v in tree.nodes}
    for u, v in tree.edges:
        adj[u].append(v)
        adj[v].append(u)
    for v in adj:
        adj[v].sort()
    return adj


def _orient(tree: Tree, root: int) -> tuple[dict[int, int | None], list[int]]:
    """Parent map and a top-down node order for the tree rooted at ``root``."""
    adj = _adjacency(tree)
    parent: dict[int, int | None] = {root: None}
    order = [root]
    for v in order:
        for u in adj[v]:
            if u not in parent:
                parent[u] = v
                order.append(u)
    if len(order) != len(tree.nodes):
        raise ValueError("tree is not connected")
    return parent, order


def central_root(tree: Tree) -> int:
    """Node with the highest betweenness in the tree (lowest index on ties)."""
    if len(tree.nodes) == 1:
        return next(iter(tree.nodes))
    start = min(tree.nodes)
    parent, order = _orient(tree, start)
    size = {v: 1 for v in order}
    for v in reversed(order[1:]):
        size[parent[v]] += size[v]
    total = len(order)
    best, best_score = start, -1
    adj = _adjacency(tree)
    for v in sorted(tree.nodes):
        parts = [size[u] for u in adj[v] if parent.get(u) == v]
        if parent[v] is not None:
            parts.append(total - size[v])
        s = total - 1
        score = (s * s - sum(p * p for p in parts)) // 2
        if score > best_score:
            best, best_score = v, score
    return best


def _ceil_pow2(x: int) -> int:
    return 1 << (x - 1).bit_length() if x > 1 else 1


def _demands(parent: dict[int, int | None], order: list[int]) -> tuple[dict[int, int], dict[int, list[int]]]:
    children: dict[int, list[int]] = {v: [] for v in order}
    for v in order[1:]:
        children[parent[v]].append(v)
    for v in children:
        children[v].sort()
    demand: dict[int, int] = {}
    for v in reversed(order):
        kids = children[v]
        block = max((demand[c] for c in kids), default=1)
        demand[v] = _ceil_pow2(len(kids) + 1) * block
    return demand, children


def assign_prefixes(
    trees: Sequence[Tree],
    roots: Sequence[int] | None = None,
    space: IPv4Network = DEFAULT_SPACE,
) -> PrefixPlan:
    """Give every tree a disjoint power-of-two prefix and split it recursively.

    At each node the prefix is cut into ``2**ceil(log2(c + 1))`` equal parts
    for ``c`` children: the first part holds the node's own address, the
    next ``c`` go to the children in index order. Each node routes a child's
    part towards that child and the whole tree prefix towards its parent.
    """
    if roots is None:
        roots = [central_root(t) for t in trees]
    if len(roots) != len(trees):
        raise ValueError("need one root per tree")
    layouts = []
    for t, r in zip(trees, roots):
        if r not in t.nodes:
            raise ValueError(f"root {r} is not a node of its tree")
        parent, order = _orient(t, r)
        demand, children = _demands(parent, order)
        layouts.append((parent, order, demand, children))

    sizes = [lay[2][lay[1][0]] for lay in layouts]
    required = [32 - (s.bit_length() - 1) for s in sizes]
    base = int(space.network_address)
    cursor = 0
    offsets = [0] * len(trees)
    # Largest first keeps every block aligned without gaps.
    for i in sorted(range(len(trees)), key=lambda i: (-sizes[i], i)):
        offsets[i] = cursor
        cursor += sizes[i]
    if cursor > space.num_addresses:
        raise AddressSpaceError(required, space)

    plans = []
    routes: dict[int, list[Route]] = {}
    addresses: dict[int, list[IPv4Address]] = {}
    for ti, (parent, order, demand, children) in enumerate(layouts):
        root = order[0]
        start = {root: base + offsets[ti]}
        size = {root: sizes[ti]}
        node_prefix: dict[int, IPv4Network] = {}
        address: dict[int, IPv4Address] = {}
        for v in order:
            node_prefix[v] = ipaddress.ip_network((start[v], 32 - (size[v].bit_length() - 1)))
            part = size[v] // _ceil_pow2(len(children[v]) + 1)
            address[v] = IPv4Address(start[v])
            for slot, c in enumerate(children[v], 1):
                start[c] = start[v] + slot * part
                size[c] = part
        tree_prefix = node_prefix[root]
        for v in order:
            rs = routes.setdefault(v, [])
            for c in children[v]:
                rs.append(Route(node_prefix[c], c, ti))
            if parent[v] is not None:
                rs.append(Route(tree_prefix, parent[v], ti))
            addresses.setdefault(v, []).append(address[v])
        plans.append(TreePlan(root, tree_prefix, parent, node_prefix, address))

    return PrefixPlan(
        tuple(plans),
        {v: tuple(sorted(rs, key=lambda r: (r.prefix, r.via))) for v, rs in sorted(routes.items())},
        {v: tuple(sorted(a)) for v, a in sorted(addresses.items())},
    )


def lookup(plan: PrefixPlan, node: int, address: IPv4Address) -> Route | None:
    best = None
    for r in plan.routes.get(node, ()):
        if address in r.prefix and (best is None or r.prefix.prefixlen > best.prefix.prefixlen):
            best = r
    return best


def simulate_lpm_walk(
    plan: PrefixPlan, tree: Tree, src: int, dst_address: IPv4Address | str
) -> tuple[int, ...]:
    """Forward hop by hop from ``src`` using each node's full route table.

    Returns the visited node sequence ending at the owner of the address,
    or an empty tuple when ``src`` owns it. Lookups see the routes of every
    tree, so a walk that strays from ``tree`` shows up as a wrong sequence.
    """
    dst_address = IPv4Address(dst_address)
    if src not in tree.nodes:
        raise ValueError(f"node {src} is not in the tree")
    owner = plan.owner(dst_address)
    if owner is not None and owner not in tree.nodes:
        raise ValueError(f"{dst_address} belongs to node {owner}, outside the tree")
    if dst_address in plan.addresses.get(src, ()):
        return ()
    walk = [src]
    limit = len(plan.routes) + 1
    node = src
    while dst_address not in plan.addresses.get(node, ()):
        r = lookup(plan, node, dst_address)
        if r is None:
            raise LpmError(node, dst_address)
        node = r.via
        walk.append(node)
        if len(walk) > limit:
            raise LpmError(node, dst_address, "forwarding loop")
    return tuple(walk)


def tree_path(tree: Tree, src: int, dst: int) -> tuple[int, ...]:
    """The unique path between two nodes of a tree."""
    parent, _ = _orient(tree, src)
    seq = [dst]
    while seq[-1] != src:
        seq.append(parent[seq[-1]])
    return tuple(reversed(seq))


def check_plan(plan: PrefixPlan, trees: Sequence[Tree]) -> tuple[int, list[str]]:
    """Walk every (src, dst) pair of every tree; returns (walks, failures)."""
    failures = []
    walks = 0
    for ti, (t, tp) in enumerate(zip(trees, plan.trees)):
        for dst in sorted(t.nodes):
            addr = tp.address[dst]
            for src in sorted(t.nodes):
                if src == dst:
                    continue
                walks += 1
                try:
                    got = simulate_lpm_walk(plan, t, src, addr)
                except LpmError as exc:
                    failures.append(f"tree {ti}: {exc}")
                    continue
                want = tree_path(t, src, dst)
                if got != want:
                    failures.append(f"tree {ti}: walk {got} != tree path {want}")
    return walks, failures


# -- serialization -------------------------------------------------------------

def vlan_to_json(cfg: VlanConfig, net: Network) -> str:
    lab = net.labels
    doc = {
        "tags": cfg.n_tags,
        "switches": {
            lab[s]: {str(tag): [lab[p] for p in ps] for tag, ps in tags.items()}
            for s, tags in cfg.ports.items()
        },
    }
    return json.dumps(doc, indent=2) + "\n"


def vlan_to_text(cfg: VlanConfig, net: Network) -> str:
    lab = net.labels
    lines = [
        f"switch {lab[s]} vlan {tag} ports {','.join(lab[p] for p in ps)}"
        for s, tags in cfg.ports.items()
        for tag, ps in tags.items()
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def plan_to_json(plan: PrefixPlan, net: Network) -> str:
    lab = net.labels
    doc = {
        "trees": [
            {
                "tree": i,
                "root": lab[tp.root],
                "prefix": str(tp.prefix),
                "nodes": {
                    lab[v]: {
                        "address": str(tp.address[v]),
                        "prefix": str(tp.node_prefix[v]),
                        "parent": None if tp.parent[v] is None else lab[tp.parent[v]],
                    }
                    for v in sorted(tp.address)
                },
            }
            for i, tp in enumerate(plan.trees)
        ],
        "routes": {
            lab[v]: [{"prefix": str(r.prefix), "via": lab[r.via], "tree": r.tree} for r in rs]
            for v, rs in plan.routes.items()
        },
    }
    return json.dumps(doc, indent=2) + "\n"


def plan_from_json(doc: dict, net: Network) -> PrefixPlan:
    """Inverse of :func:`plan_to_json`; raises ``ValueError`` on bad input."""
    try:
        idx = net.node
        plans = []
        addresses: dict[int, list[IPv4Address]] = {}
        for entry in doc["trees"]:
            nodes = entry["nodes"]
            parent = {idx(k): (None if d["parent"] is None else idx(d["parent"])) for k, d in nodes.items()}
            address = {idx(k): IPv4Address(d["address"]) for k, d in nodes.items()}
            node_prefix = {idx(k): IPv4Network(d["prefix"]) for k, d in nodes.items()}
            plans.append(TreePlan(idx(entry["root"]), IPv4Network(entry["prefix"]), parent, node_prefix, address))
            for v, a in address.items():
                addresses.setdefault(v, []).append(a)
        routes = {
            idx(k): tuple(Route(IPv4Network(r["prefix"]), idx(r["via"]), int(r["tree"])) for r in rs)
            for k, rs in doc["routes"].items()
        }
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValueError(f"malformed prefix plan: {exc!r}") from None
    return PrefixPlan(
        tuple(plans),
        dict(sorted(routes.items())),
        {v: tuple(sorted(a)) for v, a in sorted(addresses.items())},
    )


def plan_to_text(plan: PrefixPlan, net: Network) -> str:
    lab = net.labels
    lines = []
    for v, addrs in plan.addresses.items():
        for a in addrs:
            lines.append(f"address {lab[v]} {a}/32")
    for v, rs in plan.routes.items():
        for r in rs:
            lines.append(f"route {lab[v]} {r.prefix} via {lab[r.via]}")
    return "\n".join(lines) + ("\n" if lines else "")
