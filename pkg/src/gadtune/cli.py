"""Command-line entry point: ``gadtune <subcommand> ...``.

Exit codes: 0 on success, 2 for an invalid config or arguments, 3 when every
trial of a search failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .errors import ConfigError, SearchError, ValidationError
from .graph import load_graph, save_graph
from .harness import (
    GRANULARITY_LEVELS,
    build_dataset,
    cross_detector_study,
    granularity_sweep,
    k_sensitivity,
    load_config,
    run_experiment,
)
from .harness.experiment import fmt
from .injection import InjectionPlan, inject, save_injected

EXIT_OK, EXIT_CONFIG, EXIT_SEARCH = 0, 2, 3

log = logging.getLogger("gadtune")


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _print_table(header, rows, out=None):
    out = out or sys.stdout
    cells = [[fmt(v) if not isinstance(v, str) else v for v in row] for row in rows]
    cells = [[_short(c) for c in row] for row in cells]
    widths = [max(len(str(h)), *(len(r[i]) for r in cells)) if cells else len(str(h)) for i, h in enumerate(header)]
    print("  ".join(str(h).ljust(w) for h, w in zip(header, widths)), file=out)
    for row in cells:
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)), file=out)


def _short(cell):
    try:
        value = float(cell)
    except ValueError:
        return cell
    if cell in ("inf", "-inf") or value == int(value) and "." not in cell:
        return cell
    return f"{value:.4f}"


# -- subcommands ------------------------------------------------------------


def cmd_inject(args):
    if args.config:
        dataset = build_dataset(load_config(args.config))
        paths = save_graph(dataset.graph, args.out)
        with open(Path(args.out) / "injection.json", "w", encoding="utf-8") as fh:
            json.dump(dataset.manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {len(paths) + 1} files to {args.out}")
        return EXIT_OK
    if not (args.edges and args.attributes):
        raise ConfigError("inject needs --config or both --edges and --attributes")
    g = load_graph(args.edges, args.attributes, id_map_path=args.id_map)
    if args.ratio is not None:
        plan = InjectionPlan.for_ratio(g.n, args.ratio, clique_size=args.clique_size,
                                       candidate_pool=args.candidate_pool, seed=args.seed)
    else:
        plan = InjectionPlan(args.clique_size, args.clique_count, args.contextual_count,
                             args.candidate_pool, args.seed)
    res = inject(g, plan)
    save_injected(res, args.out)
    print(f"injected {plan.structural_count} structural + {plan.contextual_count} contextual anomalies "
          f"into {g.n} nodes -> {args.out}")
    return EXIT_OK


def _load(args, **search_overrides):
    cfg = load_config(args.config)
    if args.out:
        cfg.output_dir = Path(args.out)
    overrides = {k: v for k, v in search_overrides.items() if v is not None}
    return cfg.with_search(**overrides) if overrides else cfg


def _run_and_print(cfg):
    res = run_experiment(cfg, on_phase=lambda p: log.info("phase: %s", p))
    header = ["seed", "best_config", "csm_auc", "min_auc", "median_auc", "max_auc", "gain_median"]
    rows = [[s.seed, s.best_config, s.csm_auc, s.min_auc, s.median_auc, s.max_auc, s.gain_median]
            for s in res.summaries]
    a = res.aggregate
    rows.append(["mean", "", a["csm_auc"], a["min_auc"], a["median_auc"], a["max_auc"], a["gain_median"]])
    _print_table(header, rows)
    print(f"outputs in {cfg.output_dir}")
    return EXIT_OK


def cmd_sweep(args):
    return _run_and_print(_load(args, mode="grid"))


def cmd_smbo(args):
    cfg = _load(args, mode="smbo", budget=args.budget, init_j=args.init_j, pool_size=args.pool_size)
    if cfg.search.budget > cfg.search.space.size:
        raise ConfigError(f"budget {cfg.search.budget} exceeds the {cfg.search.space.size}-point grid")
    return _run_and_print(cfg)


def cmd_ksens(args):
    cfg = _load(args)
    table = k_sensitivity(cfg, args.ratios)
    _print_table(table.header[:-1], [r[:-1] for r in table.rows])
    print(f"wrote {table.path}")
    return EXIT_OK


def cmd_granularity(args):
    cfg = _load(args)
    unknown = [lv for lv in args.levels if lv not in GRANULARITY_LEVELS]
    if unknown:
        raise ConfigError(f"unknown granularity levels: {', '.join(unknown)}")
    table = granularity_sweep(cfg, [(lv, GRANULARITY_LEVELS[lv]) for lv in args.levels])
    _print_table(table.header, table.rows)
    print(f"wrote {table.path}")
    return EXIT_OK


def cmd_cross(args):
    cfgs = [load_config(p) for p in args.configs]
    study = cross_detector_study(cfgs, output_dir=args.out)
    _print_table(["name", "detector", "best_t", "csm_auc"], study.rows)
    if study.r is None:
        print(f"pearson r: undefined ({study.reason})")
    else:
        print(f"pearson r: {study.r:.4f}")
    print(study.note)
    return EXIT_OK


def cmd_report(args):
    path = Path(args.path)
    if path.is_dir():
        path = path / "summary.csv"
    if not path.exists():
        raise ConfigError(f"no summary at {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigError(f"{path} is empty")
    header, body = rows[0], rows[1:]
    keep = [c for c in ("detector", "seed", "best_config", "csm_auc", "min_auc", "median_auc", "max_auc",
                        "variation", "gain_min", "gain_median", "gain_max") if c in header]
    idx = [header.index(c) for c in keep]
    _print_table(keep, [[r[i] for i in idx] for r in body])
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gadtune", description="Label-free hyperparameter selection for graph anomaly detectors.")
    p.add_argument("-v", "--verbose", action="store_true", help="log phase transitions")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("inject", help="plant anomalies into a graph")
    s.add_argument("--config", help="build the dataset described by an experiment config")
    s.add_argument("--edges")
    s.add_argument("--attributes")
    s.add_argument("--id-map")
    s.add_argument("--ratio", type=float, help="total anomaly ratio, split evenly between kinds")
    s.add_argument("--clique-size", type=int, default=15)
    s.add_argument("--clique-count", type=int, default=1)
    s.add_argument("--contextual-count", type=int, default=15)
    s.add_argument("--candidate-pool", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_inject)

    for name, func, help_ in (("sweep", cmd_sweep, "grid search over the configured grid"),
                              ("smbo", cmd_smbo, "GP/EI sequential search")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("config")
        s.add_argument("--out", help="override output_dir")
        if name == "smbo":
            s.add_argument("--budget", type=int)
            s.add_argument("--init-j", type=int)
            s.add_argument("--pool-size", type=int)
        s.set_defaults(func=func)

    s = sub.add_parser("ksens", help="selection quality across assumed anomaly ratios")
    s.add_argument("config")
    s.add_argument("--ratios", type=_floats, default=[0.025, 0.0375, 0.05, 0.0625, 0.075])
    s.add_argument("--out")
    s.set_defaults(func=cmd_ksens)

    s = sub.add_parser("granularity", help="grid search at nested granularity levels")
    s.add_argument("config")
    s.add_argument("--levels", type=lambda t: t.split(","), default=list(GRANULARITY_LEVELS))
    s.add_argument("--out")
    s.set_defaults(func=cmd_granularity)

    s = sub.add_parser("cross", help="best internal score vs AUC across detectors")
    s.add_argument("configs", nargs="+")
    s.add_argument("--out")
    s.set_defaults(func=cmd_cross)

    s = sub.add_parser("report", help="print a summary.csv as a table")
    s.add_argument("path", help="summary.csv or a run directory")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SearchError as exc:
        print(f"search failed: {exc}", file=sys.stderr)
        return EXIT_SEARCH


if __name__ == "__main__":
    sys.exit(main())
