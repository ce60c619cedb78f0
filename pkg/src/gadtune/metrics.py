"""Ground-truth metrics. Only the reporting stage calls into this module."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import ValidationError


def roc_auc(scores, labels) -> float:
    """ROC-AUC as the Mann-Whitney statistic; tied pairs count one half."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise ValidationError("scores and labels must be 1-D of equal length")
    pos = y == 1
    n_pos = int(pos.sum())
    n_neg = int((y == 0).sum())
    if n_pos + n_neg != len(y):
        raise ValidationError("labels must be 0/1")
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("labels need at least one anomaly and one normal node")
    ranks = rankdata(s)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def _aucs(aucs):
    a = np.asarray(aucs, dtype=np.float64)
    if a.size == 0:
        raise ValidationError("empty AUC list")
    return a


def performance_variation(aucs) -> float:
    """``(max - min) / max`` over a sweep."""
    a = _aucs(aucs)
    hi = a.max()
    if hi <= 0:
        raise ValidationError("max AUC must be positive")
    return float((hi - a.min()) / hi)


def _gain(csm_auc, ref):
    if ref == 0:
        raise ValidationError("reference AUC is zero")
    return float((csm_auc - ref) / ref)


def gain_over_min(csm_auc, aucs) -> float:
    return _gain(csm_auc, _aucs(aucs).min())


def gain_over_median(csm_auc, aucs) -> float:
    # np.median averages the two central values for even-length sweeps
    return _gain(csm_auc, float(np.median(_aucs(aucs))))


def gain_over_max(csm_auc, aucs) -> float:
    return _gain(csm_auc, _aucs(aucs).max())


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ValidationError("pearson needs two 1-D sequences of equal length >= 2")
    dx, dy = x - x.mean(), y - y.mean()
    sx, sy = np.sqrt((dx * dx).sum()), np.sqrt((dy * dy).sum())
    if sx == 0 or sy == 0:
        raise ValidationError("pearson is undefined for a constant input")
    return float(np.clip((dx * dy).sum() / (sx * sy), -1.0, 1.0))


SUMMARY_COLUMNS = [
    "detector", "seed", "k", "variant", "best_config", "csm_auc", "min_auc", "median_auc",
    "max_auc", "variation", "gain_min", "gain_median", "gain_max",
]


@dataclass(frozen=True)
class SweepSummary:
    detector: str
    seed: object  # int, or "mean" for the aggregate row
    k: int
    variant: str
    best_config: str
    aucs: tuple
    csm_auc: float
    min_auc: float
    median_auc: float
    max_auc: float
    variation: float
    gain_min: float
    gain_median: float
    gain_max: float

    @classmethod
    def from_sweep(cls, detector, seed, k, variant, best_config, aucs, csm_auc):
        a = _aucs(aucs)
        return cls(
            detector=detector, seed=seed, k=k, variant=variant, best_config=best_config,
            aucs=tuple(float(v) for v in a), csm_auc=float(csm_auc),
            min_auc=float(a.min()), median_auc=float(np.median(a)), max_auc=float(a.max()),
            variation=performance_variation(a),
            gain_min=gain_over_min(csm_auc, a),
            gain_median=gain_over_median(csm_auc, a),
            gain_max=gain_over_max(csm_auc, a),
        )

    def row(self) -> dict:
        return {c: getattr(self, c) for c in SUMMARY_COLUMNS}


def aggregate(summaries: list[SweepSummary]) -> dict:
    """Arithmetic mean of every numeric summary column across seeds."""
    if not summaries:
        raise ValidationError("nothing to aggregate")
    first = summaries[0]
    row = {
        "detector": first.detector, "seed": "mean", "k": first.k, "variant": first.variant,
        "best_config": "",
    }
    for c in ("csm_auc", "min_auc", "median_auc", "max_auc", "variation", "gain_min", "gain_median", "gain_max"):
        row[c] = float(np.mean([getattr(s, c) for s in summaries]))
    return row
