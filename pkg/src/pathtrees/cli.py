"""Command-line batch harness for path selection and tree aggregation.

Subcommands cover the pipeline from network generation to forwarding
state, plus a comparison table against the baselines.

Every report file is a pure function of the configuration and seeds;
wall-clock measurements go to a separate ``timings.json``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from dataclasses import dataclass
from ipaddress import IPv4Network
from pathlib import Path as FsPath
from typing import Callable, Sequence

from . import fib
from .aggregation import AggregationResult, aggregate, lsp_mtp_tree_count
from .baselines import spain_aggregate_best, spain_select
from .graph import GraphError, Network, Path, disjointness_degree, min_cost
from .selection import (
    Flag,
    SelectionParams,
    SelectionReport,
    SelectionResult,
    select_all_pairs,
)
from .serialize import FormatError, load_paths, load_trees, paths_to_json, trees_to_json
from .topology import (
    RegularSpec,
    best_k,
    best_paths,
    dump_topology,
    generate,
    load_topology,
    min_tree_count,
    selection_params,
)

log = logging.getLogger("pathtrees")

OUT_ENV = "PATHTREES_OUT"
EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT = 0, 2, 3


class ConfigError(Exception):
    pass


class InvariantError(Exception):
    pass


# -- configuration -------------------------------------------------------------

@dataclass(frozen=True)
class Budget:
    """SPAIN budget: a fixed iteration count, CPU seconds, or a multiple of
    the CPU time the tree aggregation needed on the same input."""

    iterations: int | None = None
    seconds: float | None = None
    factor: float | None = None

    @classmethod
    def parse(cls, text: str) -> "Budget":
        t = text.strip().lower()
        try:
            if t.startswith("iterations:"):
                b = cls(iterations=int(t.split(":", 1)[1]))
            elif t.startswith("seconds:"):
                b = cls(seconds=float(t.split(":", 1)[1]))
            elif t.endswith("x"):
                b = cls(factor=float(t[:-1]))
            else:
                raise ValueError
        except ValueError:
            raise ConfigError(
                f"bad budget {text!r}: use iterations:N, seconds:S or <factor>x"
            ) from None
        if (b.iterations or b.seconds or b.factor or 0) <= 0:
            raise ConfigError("budget must be positive")
        return b

    def resolve(self, agg_seconds: float) -> dict:
        if self.iterations is not None:
            return {"iterations": self.iterations}
        if self.seconds is not None:
            return {"seconds": self.seconds}
        # A floor keeps trivial inputs from getting a zero budget.
        return {"seconds": max(self.factor * agg_seconds, 1e-3)}

    def __str__(self) -> str:
        if self.iterations is not None:
            return f"iterations:{self.iterations}"
        if self.seconds is not None:
            return f"seconds:{self.seconds:g}"
        return f"{self.factor:g}x"


@dataclass
class RunConfig:
    name: str
    net: Network
    spec: RegularSpec | None
    params: SelectionParams
    auto_k: bool
    budget: Budget
    seed: int
    jobs: int
    out: FsPath
    fmt: str

    def k_for_pair(self) -> Callable[[int, int], int] | None:
        if not self.auto_k:
            return None
        spec = self.spec
        return lambda x, y: best_k(spec, x, y)

    @property
    def max_k(self) -> int:
        if not self.auto_k:
            return self.params.k
        return max(best_k(self.spec, x, y) for x, y in self.net.pairs())


def _load_network(gen: str | None, topology: str | None, prune: bool) -> tuple[str, Network, RegularSpec | None]:
    if (gen is None) == (topology is None):
        raise ConfigError("give exactly one of --gen or --topology")
    if gen is not None:
        try:
            spec = RegularSpec.parse(gen)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return str(spec), generate(spec), spec
    if not os.path.isfile(topology):
        raise ConfigError(f"topology file {topology!r} not found")
    return FsPath(topology).stem, load_topology(topology, prune=prune), None


def _parse_k(text: str | None) -> int | str | None:
    if text is None or text == "auto":
        return text
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"--k expects an integer or 'auto', got {text!r}") from None


def _build_config(args: argparse.Namespace) -> RunConfig:
    name, net, spec = _load_network(args.gen, args.topology, args.prune)
    k = _parse_k(args.k)
    h, f = args.h, args.f
    auto_k = k == "auto"
    if auto_k and spec is None:
        raise ConfigError("--k auto needs a generated network")
    if k is None or auto_k:
        if spec is None:
            raise ConfigError("--k is required for topology files")
        dk, dh, df = selection_params(spec)
        k = dk
        h = dh if h is None else h
        f = df if f is None else f
    try:
        params = SelectionParams(
            k, 0 if h is None else h, 1.0 if f is None else f, args.threshold
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = FsPath(args.out or os.environ.get(OUT_ENV) or "out")
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    return RunConfig(
        name, net, spec, params, auto_k, Budget.parse(args.budget),
        args.seed, args.jobs, out, args.format,
    )


# -- report helpers --------------------------------------------------------------

def _write(out: FsPath, name: str, text: str) -> FsPath:
    out.mkdir(parents=True, exist_ok=True)
    target = out / name
    target.write_text(text, encoding="utf-8", newline="\n")
    return target


def _json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _r(x: float, nd: int = 4) -> float:
    return round(float(x), nd)


def _markdown(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def _spain_report(cfg: RunConfig) -> SelectionReport:
    kfp = cfg.k_for_pair()
    results = []
    for x, y in cfg.net.pairs():
        k = kfp(x, y) if kfp else cfg.params.k
        t0 = time.perf_counter()
        ps = spain_select(cfg.net, x, y, k)
        elapsed = time.perf_counter() - t0
        flags = frozenset({Flag.FEWER_THAN_K}) if len(ps) < k else frozenset()
        results.append(SelectionResult(
            (x, y), ps, disjointness_degree(ps.paths), flags, 0, 1.0,
            min_cost(cfg.net, x, y)[1], len(ps), k, elapsed=elapsed,
        ))
    return SelectionReport(tuple(results), cfg.params.k)


def _run_selection(cfg: RunConfig, baseline: str = "none") -> SelectionReport:
    if baseline == "spain":
        return _spain_report(cfg)
    try:
        return select_all_pairs(cfg.net, cfg.params, jobs=cfg.jobs, k_for_pair=cfg.k_for_pair())
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _pairs_csv(cfg: RunConfig, report: SelectionReport) -> str:
    lab = cfg.net.labels
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "k", "paths", "disjointness", "hop_stretch", "cost_stretch", "h", "f", "flags"])
    for r in report.results:
        x, y = r.pair
        w.writerow([
            lab[x], lab[y], r.k, len(r.paths), r.disjointness, _r(r.hop_stretch), _r(r.cost_stretch),
            r.effective_h, r.effective_f, "|".join(sorted(fl.value for fl in r.flags)),
        ])
    return buf.getvalue()


def _summary(cfg: RunConfig, report: SelectionReport, algorithm: str) -> dict:
    p = cfg.params
    flags = {fl.value: sum(1 for r in report.results if fl in r.flags) for fl in Flag}
    doc = {
        "network": cfg.name,
        "algorithm": algorithm,
        "params": {"k": "auto" if cfg.auto_k else p.k, "h": p.h, "f": p.f, "threshold": p.threshold},
        "nodes": cfg.net.n,
        "edges": cfg.net.n_edges,
        "pairs": report.n_pairs,
        "paths": report.total_paths,
        "hop_stretch": _r(report.avg_hop_stretch),
        "cost_stretch": _r(report.avg_cost_stretch),
        "disjointness_pct": {k: _r(v, 1) for k, v in report.disjointness_distribution().items()},
        "pairs_below_k": report.pairs_below_k,
        "flags": flags,
    }
    if cfg.spec is not None:
        missing = sum(
            1 for r in report.results
            if not set(best_paths(cfg.spec, *r.pair).paths) <= set(r.paths.paths)
        )
        doc["pairs_missing_best_paths"] = missing
        doc["pairs_missing_best_paths_pct"] = _r(100.0 * missing / max(report.n_pairs, 1), 1)
    return doc


def _summary_markdown(doc: dict) -> str:
    d = doc["disjointness_pct"]
    row = [doc["network"], doc["nodes"], doc["edges"], doc["pairs"], doc["paths"],
           doc["hop_stretch"], doc["cost_stretch"], d["1"], d["2"], d[">=3"], doc["pairs_below_k"]]
    return _markdown(
        ["network", "nodes", "edges", "pairs", "paths", "hop stretch", "cost stretch",
         "disj 1 %", "disj 2 %", "disj >=3 %", "pairs <k"],
        [row],
    )


def _check_aggregation(net: Network, paths: Sequence[Path], res: AggregationResult) -> None:
    for i, p in enumerate(paths):
        t = res.cover[i]
        if t < 0 or not res.trees[t].covers(p):
            raise InvariantError(f"path {i} is not covered by its tree")
    for i, t in enumerate(res.trees):
        try:
            fib._orient(t, min(t.nodes))
        except ValueError:
            raise InvariantError(f"tree {i} is not connected") from None


def _tree_counts(cfg: RunConfig, paths: Sequence[Path], jobs: int, spain: bool) -> tuple[dict, dict]:
    """One comparison row (aggregation, SPAIN, per-destination LSPs) plus timings."""
    t0 = time.process_time()
    res = aggregate(cfg.net, paths)
    agg_cpu = time.process_time() - t0
    _check_aggregation(cfg.net, paths, res)
    k = cfg.max_k
    n = len(cfg.net.edge_nodes)
    row = {
        "network": cfg.name,
        "N": n,
        "k": k,
        "paths": len(paths),
        "min_trees": min_tree_count(cfg.spec) if cfg.spec is not None else None,
        "aggregation": len(res.trees),
        "spain": None,
        "mtp": lsp_mtp_tree_count(n, k),
    }
    timing = {"aggregation_cpu_s": agg_cpu}
    if spain:
        budget = cfg.budget.resolve(agg_cpu)
        t0 = time.process_time()
        run = spain_aggregate_best(cfg.net, paths, base_seed=cfg.seed, jobs=jobs, **budget)
        timing["spain_cpu_s"] = time.process_time() - t0
        timing["spain_iterations"] = run.iterations_executed
        row["spain"] = run.best_size
        row["spain_seed"] = run.seed
    return {"row": row, "result": res}, timing


COUNTS_HEADER = ["network", "k", "paths", "min # trees", "aggregation", "SPAIN", "m-t-p"]


def _dash(v):
    return "-" if v is None else v


def _count_rows(rows: Sequence[dict]) -> list[list]:
    return [[r["network"], r["k"], r["paths"], _dash(r["min_trees"]), r["aggregation"],
             _dash(r["spain"]), r["mtp"]] for r in rows]


# -- subcommands -----------------------------------------------------------------

def cmd_gen(args: argparse.Namespace) -> int:
    try:
        spec = RegularSpec.parse(args.gen)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    text = f"# {spec}\n" + dump_topology(generate(spec))
    if args.out:
        FsPath(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_select(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    t0 = time.perf_counter()
    report = _run_selection(cfg, args.baseline)
    wall = time.perf_counter() - t0
    algorithm = "spain" if args.baseline == "spain" else "selection"
    summary = _summary(cfg, report, algorithm)
    _write(cfg.out, "pairs.csv", _pairs_csv(cfg, report))
    _write(cfg.out, "summary.json", _json(summary))
    _write(cfg.out, "paths.json", paths_to_json(cfg.net, report.all_paths))
    _write(cfg.out, "summary.md", _summary_markdown(summary))
    timings = {k: _r(v, 6) for k, v in report.timings().items()}
    timings["wall_s"] = _r(wall, 6)
    _write(cfg.out, "timings.json", _json(timings))
    sys.stdout.write(_json(summary) if cfg.fmt == "json" else _summary_markdown(summary))
    return EXIT_OK


def _paths_for(cfg: RunConfig, paths_file: str | None) -> list[Path]:
    if paths_file is None:
        return _run_selection(cfg).all_paths
    if not os.path.isfile(paths_file):
        raise ConfigError(f"paths file {paths_file!r} not found")
    return load_paths(cfg.net, paths_file)


def cmd_aggregate(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    paths = _paths_for(cfg, args.paths)
    out, timing = _tree_counts(cfg, paths, cfg.jobs, args.spain)
    res: AggregationResult = out["result"]
    _write(cfg.out, "trees.json", trees_to_json(cfg.net, res.trees))
    doc = {"row": out["row"], "phases": res.phase_log, "budget": str(cfg.budget) if args.spain else None}
    _write(cfg.out, "aggregate.json", _json(doc))
    table = _markdown(COUNTS_HEADER, _count_rows([out["row"]]))
    _write(cfg.out, "tree_counts.md", table)
    _write(cfg.out, "timings.json", _json({k: _r(v, 6) for k, v in timing.items()}))
    sys.stdout.write(_json(doc) if cfg.fmt == "json" else table)
    return EXIT_OK


def _trees_for(cfg: RunConfig, trees_file: str | None) -> list:
    if trees_file is None:
        return list(aggregate(cfg.net, _run_selection(cfg).all_paths).trees)
    if not os.path.isfile(trees_file):
        raise ConfigError(f"trees file {trees_file!r} not found")
    return load_trees(cfg.net, trees_file)


def _space(text: str) -> IPv4Network:
    try:
        return IPv4Network(text)
    except ValueError as exc:
        raise ConfigError(f"bad address space {text!r}: {exc}") from None


def cmd_emit(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    trees = _trees_for(cfg, args.trees)
    try:
        plan = fib.assign_prefixes(trees, space=_space(args.space))
    except fib.AddressSpaceError as exc:
        raise ConfigError(str(exc)) from None
    vlan = fib.emit_vlan(trees)
    if cfg.fmt == "text":
        _write(cfg.out, "vlan.txt", fib.vlan_to_text(vlan, cfg.net))
        _write(cfg.out, "prefixes.txt", fib.plan_to_text(plan, cfg.net))
    _write(cfg.out, "vlan.json", fib.vlan_to_json(vlan, cfg.net))
    _write(cfg.out, "prefixes.json", fib.plan_to_json(plan, cfg.net))
    msg = f"{len(trees)} trees, {vlan.n_tags} VLAN tags"
    if args.check_lpm:
        walks, failures = fib.check_plan(plan, trees)
        msg += f", LPM check: {walks - len(failures)}/{walks} walks pass"
        print(msg)
        if failures:
            for f in failures[:20]:
                print(f"  {f}", file=sys.stderr)
            raise InvariantError(f"{len(failures)} LPM walks failed")
        return EXIT_OK
    print(msg)
    return EXIT_OK


def cmd_check_lpm(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    trees = _trees_for(cfg, args.trees)
    if args.plan:
        if not os.path.isfile(args.plan):
            raise ConfigError(f"plan file {args.plan!r} not found")
        with open(args.plan, encoding="utf-8") as fh:
            try:
                plan = fib.plan_from_json(json.load(fh), cfg.net)
            except (ValueError, KeyError) as exc:
                raise ConfigError(str(exc)) from None
        if len(plan.trees) != len(trees):
            raise ConfigError("plan and trees file disagree on the tree count")
    else:
        try:
            plan = fib.assign_prefixes(trees, space=_space(args.space))
        except fib.AddressSpaceError as exc:
            raise ConfigError(str(exc)) from None
    walks, failures = fib.check_plan(plan, trees)
    print(f"{walks - len(failures)}/{walks} walks pass")
    if failures:
        for f in failures[:20]:
            print(f"  {f}", file=sys.stderr)
        raise InvariantError(f"{len(failures)} LPM walks failed")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    specs = args.gen_list or []
    if args.topology:
        specs = specs + [None]
    if not specs:
        raise ConfigError("give at least one --gen or a --topology")
    rows, timings = [], {}
    for g in specs:
        ns = argparse.Namespace(**{**vars(args), "gen": g, "topology": args.topology if g is None else None})
        cfg = _build_config(ns)
        paths = _run_selection(cfg).all_paths
        out, timing = _tree_counts(cfg, paths, cfg.jobs, spain=not args.no_spain)
        rows.append(out["row"])
        timings[cfg.name] = {k: _r(v, 6) for k, v in timing.items()}
    out_dir = cfg.out
    table = _markdown(COUNTS_HEADER, _count_rows(rows))
    _write(out_dir, "tree_counts.md", table)
    _write(out_dir, "tree_counts.json", _json({"budget": str(cfg.budget), "seed": cfg.seed, "rows": rows}))
    _write(out_dir, "timings.json", _json(timings))
    sys.stdout.write(_json(rows) if cfg.fmt == "json" else table)
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------

def _common(p: argparse.ArgumentParser, multi_gen: bool = False) -> None:
    src = p.add_argument_group("network")
    if multi_gen:
        src.add_argument("--gen", dest="gen_list", action="append", metavar="KIND:SIZE",
                         help="generated network; repeat for several rows")
    else:
        src.add_argument("--gen", metavar="KIND:SIZE",
                         help="generated network: full-mesh:N, ring:N, hier:M or clos:N")
    src.add_argument("--topology", metavar="FILE", help="topology file")
    src.add_argument("--prune", action="store_true", help="drop degree-one nodes repeatedly")
    sel = p.add_argument_group("selection")
    sel.add_argument("--k", help="paths per pair, or 'auto' for the per-pair best count")
    sel.add_argument("--h", type=int, help="extra hops allowed over the optimal path")
    sel.add_argument("--f", type=float, help="cost factor allowed over the optimal path")
    sel.add_argument("--threshold", type=int, help="enable adaptive h/f with this search-set cap")
    run = p.add_argument_group("run")
    run.add_argument("--seed", type=int, default=0, help="base seed for randomized baselines")
    run.add_argument("--jobs", type=int, default=1, help="worker processes")
    run.add_argument("--budget", default="iterations:1000",
                     help="SPAIN budget: iterations:N, seconds:S or e.g. 100x (default %(default)s)")
    run.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pathtrees", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a generated network as a topology file")
    p.add_argument("--gen", required=True, metavar="KIND:SIZE")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("select", help="select paths for every edge-node pair")
    _common(p)
    p.add_argument("--baseline", choices=["none", "spain"], default="none")
    p.add_argument("--format", choices=["md", "json"], default="md")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("aggregate", help="aggregate selected paths into trees")
    _common(p)
    p.add_argument("--paths", metavar="FILE", help="paths.json from 'select' (default: select now)")
    p.add_argument("--spain", action="store_true", help="also run the randomized SPAIN aggregation")
    p.add_argument("--format", choices=["md", "json"], default="md")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("emit", help="emit VLAN and prefix forwarding state")
    _common(p)
    p.add_argument("--trees", metavar="FILE", help="trees.json from 'aggregate' (default: compute)")
    p.add_argument("--space", default=str(fib.DEFAULT_SPACE), help="address space (default %(default)s)")
    p.add_argument("--check-lpm", action="store_true", help="verify every LPM walk")
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.set_defaults(func=cmd_emit)

    p = sub.add_parser("check-lpm", help="verify LPM walks against tree paths")
    _common(p)
    p.add_argument("--trees", metavar="FILE")
    p.add_argument("--plan", metavar="FILE", help="prefixes.json from 'emit' (default: recompute)")
    p.add_argument("--space", default=str(fib.DEFAULT_SPACE))
    p.add_argument("--format", choices=["md", "json"], default="md")
    p.set_defaults(func=cmd_check_lpm)

    p = sub.add_parser("compare", help="compare tree counts against the baselines")
    _common(p, multi_gen=True)
    p.add_argument("--no-spain", action="store_true")
    p.add_argument("--format", choices=["md", "json"], default="md")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, FormatError, GraphError) as exc:
        print(f"pathtrees: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantError as exc:
        print(f"pathtrees: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
