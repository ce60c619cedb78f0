"""Sensitivity sweeps and the cross-detector correlation diagnostic.

All three studies rerun only the *selection* step where possible: trials are
shared through a :class:`~gadtune.hpo.ScoreCache`, so changing the assumed
anomaly ratio or widening the grid reuses every score vector already computed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ValidationError
from ..hpo import HyperparameterSpace, ScoreCache, select_best
from ..metrics import pearson
from .config import ExperimentConfig
from .experiment import build_dataset, run_experiment, write_csv

UNRELIABLE_NOTE = (
    "diagnostic only: the correlation between best internal score and AUC across detectors "
    "does not predict which detector performs better and must not be used to choose one"
)


@dataclass
class StudyTable:
    header: list
    rows: list
    path: Path | None = None


def _mean(values):
    return float(np.mean(values))


def k_sensitivity(cfg: ExperimentConfig, ratios, *, graph=None, cache=None, write=True) -> StudyTable:
    """Repeat selection for several assumed anomaly ratios.

    Each row holds the ratio, the resulting k, and seed-means of the selected
    configuration's AUC and of the sweep's min/median/max AUC.
    """
    ratios = list(ratios)
    if not ratios or any(not 0.0 < r < 0.5 for r in ratios):
        raise ValidationError("ratios must be a non-empty list within (0, 0.5)")
    graph = graph if graph is not None else build_dataset(cfg).graph
    cache = cache if cache is not None else ScoreCache()
    rows = []
    for r in ratios:
        res = run_experiment(cfg.with_search(ratio=r), graph=graph, cache=cache, write=False)
        s = res.summaries
        rows.append([r, res.k, _mean([x.csm_auc for x in s]), _mean([x.min_auc for x in s]),
                     _mean([x.median_auc for x in s]), _mean([x.max_auc for x in s]),
                     ";".join(x.best_config for x in s)])
    header = ["ratio", "k", "csm_auc", "min_auc", "median_auc", "max_auc", "best_configs"]
    table = StudyTable(header, rows)
    if write:
        table.path = _write(cfg, "ksens.csv", table)
    return table


def check_nested(levels) -> list:
    """Turn ``[(label, grid_dict), ...]`` into spaces, requiring each to contain the previous."""
    spaces = []
    for label, grid in levels:
        space = grid if isinstance(grid, HyperparameterSpace) else HyperparameterSpace.from_dict(grid)
        if spaces and not spaces[-1][1].is_subset_of(space):
            raise ValidationError(f"grid {label!r} does not contain the preceding level {spaces[-1][0]!r}")
        spaces.append((label, space))
    if not spaces:
        raise ValidationError("no granularity levels given")
    return spaces


def granularity_sweep(cfg: ExperimentConfig, levels, *, graph=None, cache=None, write=True) -> StudyTable:
    """Grid search at each nested level; one row per (level, seed) plus a seed-mean row.

    Because the levels are nested and trials are cached, the selected
    internal score can only stay equal or grow from one level to the next.
    """
    spaces = check_nested(levels)
    graph = graph if graph is not None else build_dataset(cfg).graph
    cache = cache if cache is not None else ScoreCache()
    rows = []
    for label, space in spaces:
        res = run_experiment(cfg.with_search(mode="grid", space=space, grid_label=label),
                             graph=graph, cache=cache, write=False)
        best_ts = []
        for summary in res.summaries:
            best = select_best(res.searches[summary.seed].trials)
            best_ts.append(best.t_value)
            rows.append([label, space.size, summary.seed, summary.best_config, best.t_value, summary.csm_auc])
        rows.append([label, space.size, "mean", "", _mean(best_ts), _mean([s.csm_auc for s in res.summaries])])
    header = ["level", "configs", "seed", "best_config", "best_t", "csm_auc"]
    table = StudyTable(header, rows)
    if write:
        table.path = _write(cfg, "granularity.csv", table)
    return table


@dataclass
class CrossStudy:
    rows: list  # (name, detector, best_t, csm_auc)
    r: float | None
    note: str
    reason: str = ""
    path: Path | None = None

    def to_dict(self) -> dict:
        return {
            "detectors": [dict(zip(("name", "detector", "best_t", "csm_auc"), r)) for r in self.rows],
            "pearson_r": self.r,
            "undefined_reason": self.reason,
            "note": self.note,
        }


def cross_detector_study(cfgs, *, graph=None, output_dir=None, write=True) -> CrossStudy:
    """Correlate each detector's best internal score with its selected AUC.

    All configs must describe the same dataset. The correlation is reported
    as a diagnostic, never used to pick a detector.
    """
    cfgs = list(cfgs)
    if len(cfgs) < 3:
        raise ValidationError("the cross-detector study needs at least three configs")
    if graph is None:
        graph = build_dataset(cfgs[0]).graph
        for other in cfgs[1:]:
            if build_dataset(other).graph.content_hash() != graph.content_hash():
                raise ValidationError(f"config {other.name!r} uses a different dataset")
    rows = []
    for cfg in cfgs:
        res = run_experiment(cfg, graph=graph, write=False)
        best_t = _mean([select_best(res.searches[s].trials).t_value for s in cfg.seeds])
        rows.append([cfg.name, cfg.kind, best_t, _mean([s.csm_auc for s in res.summaries])])
    t = [r[2] for r in rows]
    a = [r[3] for r in rows]
    r, reason = None, ""
    if not all(math.isfinite(v) for v in t):
        reason = "a best internal score is infinite (perfect separation)"
    else:
        try:
            r = pearson(t, a)
        except ValidationError as exc:
            reason = str(exc)
    study = CrossStudy(rows, r, UNRELIABLE_NOTE, reason)
    if write:
        out = Path(output_dir if output_dir is not None else cfgs[0].output_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "cross.csv", ["name", "detector", "best_t", "csm_auc"], rows)
        study.path = out / "cross.json"
        with open(study.path, "w", encoding="utf-8") as fh:
            json.dump(study.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return study


def _write(cfg, filename, table):
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / filename
    write_csv(path, table.header, table.rows)
    return path
