"""Command-line entry point: synthesize, evaluate, benchmark, im."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import numpy as np

from .community import ConfigError
from .config import INTER_SAMPLING, METHODS, NORM_SUB_SCOPES, SynthesisConfig, load_config
from .dp import BudgetViolationError, InvalidBudgetError, PrivacyLedger, accountant_check
from .graph import Graph, ParseError, read_edge_list, write_edge_list
from .im import DEFAULT_P, DEFAULT_TRIALS, degree_discount, ic_spread
from .metrics import CSV_COLUMNS, MetricsReport, evaluate
from .reconstruction import synthesize
from .tmf import tmf_budget, tmf_synthesize

log = logging.getLogger("privgraph")

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_graph(path: str, known_labels=None):
    if not os.path.exists(path):
        raise UsageError(f"input file not found: {path}")
    return read_edge_list(path, known_labels)


def build_config(args) -> SynthesisConfig:
    base = load_config(args.config) if getattr(args, "config", None) else {}
    overrides = {
        "method": getattr(args, "method", None),
        "eps_total": getattr(args, "eps", None),
        "budget_split": tuple(args.split) if getattr(args, "split", None) else None,
        "N": getattr(args, "N", None),
        "t": getattr(args, "t", None),
        "seed": getattr(args, "seed", None),
        "norm_sub_scope": getattr(args, "norm_sub_scope", None),
        "inter_sampling": getattr(args, "inter_sampling", None),
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    return SynthesisConfig(**base)


def run_method(g: Graph, config: SynthesisConfig, seed) -> tuple[Graph, PrivacyLedger, dict]:
    """One private release with its ledger and accountant verdict."""
    if config.method == "tmf":
        ledger = PrivacyLedger()
        syn = tmf_synthesize(
            g,
            config.eps_total,
            np.random.default_rng(seed),
            count_fraction=config.tmf_count_fraction,
            max_cells=config.tmf_max_cells,
            ledger=ledger,
        )
        verdict = accountant_check(tmf_budget(config.eps_total, config.tmf_count_fraction), ledger)
    else:
        budget = config.budget()
        syn, ledger = synthesize(g, config, budget, np.random.default_rng(seed))
        verdict = accountant_check(budget, ledger)
    if not verdict.passed:
        raise BudgetViolationError("; ".join(verdict.violations))
    return syn, ledger, verdict.to_dict()


def cmd_synthesize(args) -> int:
    config = build_config(args)
    g, labels = _read_graph(args.input)
    syn, ledger, verdict = run_method(g, config, config.seed)
    atomic_write(args.output, write_edge_list(syn, labels))
    ledger_path = args.ledger or args.output + ".ledger.json"
    doc = {"config": config.to_dict(), "ledger": ledger.to_dict(), "verdict": verdict}
    atomic_write(ledger_path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    log.info("wrote %s (%d nodes, %d edges) and %s", args.output, syn.node_count, syn.edge_count, ledger_path)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    g, labels = _read_graph(args.original)
    try:
        syn, _ = _read_graph(args.synthetic, known_labels=labels)
    except ParseError as exc:
        raise UsageError(f"{args.synthetic}: node set differs from {args.original}: {exc}") from None
    report = evaluate(g, syn, seed=args.seed, clustering=args.clustering)
    text = report.to_json() + "\n"
    if args.json:
        atomic_write(args.json, text)
    else:
        sys.stdout.write(text)
    if args.csv:
        atomic_write(args.csv, report.to_csv())
    return EXIT_OK


def _bench_job(job):
    node_count, edges, config_dict, seed, eval_seed = job
    g = Graph(node_count, edges)
    config = SynthesisConfig(**{**config_dict, "budget_split": tuple(config_dict["budget_split"])})
    start = time.perf_counter()
    syn, _, _ = run_method(g, config, seed)
    report = evaluate(g, syn, seed=eval_seed)
    return report.to_dict(), time.perf_counter() - start


def _workers() -> int:
    cap = os.environ.get("PRIVGRAPH_THREADS")
    if cap:
        try:
            return max(1, int(cap))
        except ValueError:
            raise UsageError(f"PRIVGRAPH_THREADS must be an integer, got {cap!r}") from None
    return os.cpu_count() or 1


def run_benchmark(g: Graph, base: SynthesisConfig, eps_list, methods, reps: int, seed: int, workers: int = 1):
    """Per-repetition rows and per-(method, eps) aggregates. Rep ``r`` uses seed ``seed + r``."""
    if reps < 1:
        raise UsageError("reps must be at least 1")
    jobs, keys = [], []
    for method in methods:
        for eps in eps_list:
            cfg = base.with_overrides(method=method, eps_total=float(eps))
            for r in range(reps):
                jobs.append((g.node_count, g.edges, cfg.to_dict(), seed + r, seed + r))
                keys.append((method, float(eps), r, seed + r))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_bench_job, jobs))
    else:
        results = [_bench_job(j) for j in jobs]

    rows = []
    for (method, eps, r, s), (report, secs) in zip(keys, results):
        rows.append({"method": method, "eps": eps, "rep": r, "seed": s, "seconds": secs,
                     **{c: report[c] for c in CSV_COLUMNS}})
    aggregates = []
    for method in methods:
        for eps in eps_list:
            sel = [row for row in rows if row["method"] == method and row["eps"] == float(eps)]
            agg = {"method": method, "eps": float(eps), "reps": len(sel)}
            for c in CSV_COLUMNS:
                vals = np.array([row[c] for row in sel], dtype=np.float64)
                agg[f"{c}_mean"] = float(vals.mean())
                agg[f"{c}_std"] = float(vals.std())
            aggregates.append(agg)
    return rows, aggregates


PER_REP_COLUMNS = ("method", "eps", "rep", "seed", *CSV_COLUMNS)
AGGREGATE_COLUMNS = ("method", "eps", "reps", *(f"{c}_{s}" for c in CSV_COLUMNS for s in ("mean", "std")))


def _csv_text(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in columns])
    return buf.getvalue()


def cmd_benchmark(args) -> int:
    base = build_config(args)
    g, _ = _read_graph(args.input)
    seed = base.seed if base.seed is not None else 0
    eps_list = args.eps_list or [base.eps_total]
    methods = args.methods or [base.method]
    for m in methods:
        if m not in METHODS:
            raise UsageError(f"unknown method {m!r}")
    t0 = time.perf_counter()
    rows, aggregates = run_benchmark(g, base, eps_list, methods, args.reps, seed, _workers())
    wall = time.perf_counter() - t0
    atomic_write(args.output, _csv_text(aggregates, AGGREGATE_COLUMNS))
    if args.per_rep:
        atomic_write(args.per_rep, _csv_text(rows, PER_REP_COLUMNS))
    if args.record:
        record = {
            "config": base.to_dict(),
            "eps_list": [float(e) for e in eps_list],
            "methods": list(methods),
            "reps": args.reps,
            "repetitions": rows,
            "aggregates": aggregates,
            "wall_seconds": wall,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        atomic_write(args.record, json.dumps(record, indent=2) + "\n")
    return EXIT_OK


def cmd_im(args) -> int:
    g, labels = _read_graph(args.original)
    try:
        syn, _ = _read_graph(args.synthetic, known_labels=labels)
    except ParseError as exc:
        raise UsageError(f"{args.synthetic}: node set differs from {args.original}: {exc}") from None
    seeds = degree_discount(syn, args.k, args.p)
    est = ic_spread(g, seeds, args.p, args.trials, np.random.default_rng(args.seed))
    row = {"k": args.k, "p": args.p, "trials": est.trials, "mean": est.mean, "std": est.std,
           "seeds": " ".join(labels[s] for s in seeds)}
    text = _csv_text([row], ("k", "p", "trials", "mean", "std", "seeds"))
    if args.output:
        atomic_write(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _add_synthesis_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML file with synthesis settings; flags override it")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--eps", type=float, help="total privacy budget")
    p.add_argument("--split", type=float, nargs=3, metavar=("F1", "F2", "F3"), help="budget fractions per phase")
    p.add_argument("--N", type=int, help="initial community size")
    p.add_argument("--t", type=float, help="modularity resolution")
    p.add_argument("--seed", type=int)
    p.add_argument("--norm-sub-scope", choices=NORM_SUB_SCOPES)
    p.add_argument("--inter-sampling", choices=INTER_SAMPLING)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="privgraph", description="Edge-private synthetic graph release")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", help="release a synthetic edge list and its budget ledger")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--ledger", help="ledger JSON path (default: OUTPUT.ledger.json)")
    _add_synthesis_flags(p)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("evaluate", help="compare a synthetic graph against the original")
    p.add_argument("original")
    p.add_argument("synthetic")
    p.add_argument("--json")
    p.add_argument("--csv")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clustering", choices=("global", "average"), default="global")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("benchmark", help="repeated synthesis and evaluation over budgets and methods")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True, help="aggregate CSV")
    p.add_argument("--per-rep", help="per-repetition CSV")
    p.add_argument("--record", help="run record JSON")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--eps-list", type=float, nargs="+")
    p.add_argument("--methods", nargs="+")
    _add_synthesis_flags(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("im", help="Degree-Discount seeds on the synthetic graph, spread on the original")
    p.add_argument("original")
    p.add_argument("synthetic")
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--p", type=float, default=DEFAULT_P)
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_im)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (BudgetViolationError, AssertionError) as exc:
        print(f"privgraph: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (UsageError, ParseError, ConfigError, InvalidBudgetError, OSError, ValueError) as exc:
        print(f"privgraph: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
