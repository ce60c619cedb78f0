"""Multi-seed search runs with a label-free search phase and a separate report phase."""

from __future__ import annotations

import csv
import json
import math
import platform
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from .. import __version__
from ..detectors import DetectorSpec
from ..errors import ConfigError
from ..graph import AttributedGraph, generate_synthetic, load_graph
from ..hpo import ScoreCache, SearchResult, grid_search, make_trial_runner, select_best, smbo_search
from ..injection import inject
from ..internal_eval import choose_k
from ..metrics import SUMMARY_COLUMNS, SweepSummary, aggregate, roc_auc
from .config import ExperimentConfig

PHASES = ("build", "search", "report")


@dataclass
class Dataset:
    graph: AttributedGraph
    manifest: dict


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    k: int
    searches: dict  # seed -> SearchResult
    summaries: list  # SweepSummary per seed, in seed order
    aggregate: dict
    paths: dict

    def trials(self):
        for seed in sorted(self.searches):
            yield from sorted(self.searches[seed].trials, key=lambda t: t.config)


def build_dataset(cfg: ExperimentConfig) -> Dataset:
    """Materialize the labeled graph named by the config."""
    if cfg.synthetic is not None:
        base = generate_synthetic(**cfg.synthetic)
        res = inject(base, cfg.injection)
        manifest = res.manifest()
        manifest["source"] = "synthetic"
        return Dataset(res.graph, manifest)
    f = cfg.files
    g = load_graph(f["edges"], f["attributes"], f["labels"], f.get("id_map"))
    return Dataset(g, {"source": "files", "n": g.n, "edges": g.num_edges, "d": g.d})


def search_seed(cfg: ExperimentConfig, graph, k, seed, cache=None) -> SearchResult:
    """Run the configured searcher for one seed on a label-free view of ``graph``."""
    s = cfg.search
    template = DetectorSpec(cfg.kind, s.space.configurations()[0].as_dict(), cfg.training, seed)
    run_trial = make_trial_runner(
        template, graph, k, s.variant, cache=cache,
        underfit_window=s.underfit_window, underfit_tol=s.underfit_tol, time_budget=s.time_budget,
    )
    if s.mode == "grid":
        return grid_search(run_trial, s.space, seed=seed)
    return smbo_search(run_trial, s.space, init_j=s.init_j, budget=s.budget, pool_size=s.pool_size, seed=seed)


def run_experiment(cfg: ExperimentConfig, *, graph=None, cache=None, on_phase=None, write=True) -> ExperimentResult:
    """Search every seed, then score all trials against ground truth.

    The search phase only ever sees ``graph.without_labels()``; labels are
    first touched in the report phase, after every seed has picked its
    configuration. ``on_phase(name)`` is called on entering each phase.
    Passing ``graph`` skips dataset construction.
    """
    notify = on_phase or (lambda name: None)
    notify("build")
    if graph is None:
        dataset = build_dataset(cfg)
        graph, data_manifest = dataset.graph, dataset.manifest
    else:
        data_manifest = {"source": "in-memory", "n": graph.n}
    k = choose_k(graph.n, cfg.search.ratio)
    unlabeled = graph.without_labels()

    notify("search")
    searches = {seed: search_seed(cfg, unlabeled, k, seed, cache) for seed in cfg.seeds}

    notify("report")
    if not graph.has_labels:
        raise ConfigError("the dataset has no labels; AUC-based reporting is impossible")
    labels = graph.labels
    summaries = []
    for seed in cfg.seeds:
        result = searches[seed]
        for t in result.trials:
            if t.ok:
                t.auc = roc_auc(t.scores, labels)
        ok = [t for t in result.trials if t.ok]
        best = select_best(result.trials)
        summaries.append(SweepSummary.from_sweep(
            cfg.kind, seed, k, cfg.search.variant, best.config.label(), [t.auc for t in ok], best.auc,
        ))
    agg = aggregate(summaries)
    result = ExperimentResult(cfg, k, searches, summaries, agg, {})
    if write:
        result.paths = write_outputs(result, data_manifest)
    return result


# -- serialization ----------------------------------------------------------


def fmt(value) -> str:
    """Stable text form for CSV cells (shortest round-trip repr for floats)."""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def trial_rows(result: ExperimentResult):
    names = list(result.config.search.space.names)
    header = ["seed", "config", *names, "status", "t_value", "auc"]
    rows = []
    for seed in sorted(result.searches):
        for t in sorted(result.searches[seed].trials, key=lambda t: t.config):
            rows.append([seed, t.config.label(), *t.config.values, t.status.value, t.t_value, t.auc])
    return header, rows


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def summary_rows(summaries, agg):
    rows = [s.row() for s in summaries]
    rows.append(agg)
    return [[r[c] for c in SUMMARY_COLUMNS] for r in rows]


def versions() -> dict:
    return {"gadtune": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def write_outputs(result: ExperimentResult, data_manifest) -> dict:
    out = Path(result.config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"trials": out / "trials.csv", "summary": out / "summary.csv", "manifest": out / "manifest.json"}
    write_csv(paths["trials"], *trial_rows(result))
    write_csv(paths["summary"], SUMMARY_COLUMNS, summary_rows(result.summaries, result.aggregate))
    statuses = {}
    for t in result.trials():
        statuses[t.status.value] = statuses.get(t.status.value, 0) + 1
    manifest = {
        "config": result.config.echo(),
        "seeds": list(result.config.seeds),
        "k": result.k,
        "dataset": data_manifest,
        "injection_reuse": "one injected graph shared by all seeds; seeds vary detector training and search",
        "trial_status_counts": dict(sorted(statuses.items())),
        "versions": versions(),
    }
    with open(paths["manifest"], "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return paths
