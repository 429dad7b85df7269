"""Multipath selection and aggregation of paths into covering trees."""

from .aggregation import AggregationResult, Tree, aggregate, lsp_mtp_tree_count
from .baselines import spain_aggregate_best, spain_aggregate_once, spain_select
from .fib import assign_prefixes, emit_vlan, simulate_lpm_walk
from .graph import Network, Path, PathSet, disjointness_degree, sharing
from .selection import (
    Flag,
    SelectionParams,
    SelectionReport,
    best_subset,
    select_all_pairs,
    select_paths,
    select_paths_adaptive,
)
from .topology import Kind, RegularSpec, generate, load_topology

__all__ = [
    "AggregationResult", "Flag", "Kind", "Network", "Path", "PathSet", "RegularSpec",
    "SelectionParams", "SelectionReport", "Tree", "aggregate", "assign_prefixes",
    "best_subset", "disjointness_degree", "emit_vlan", "generate", "load_topology",
    "lsp_mtp_tree_count", "select_all_pairs", "select_paths", "select_paths_adaptive",
    "sharing", "simulate_lpm_walk", "spain_aggregate_best", "spain_aggregate_once",
    "spain_select",
]
