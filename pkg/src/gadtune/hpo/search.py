"""Grid search and GP/EI sequential model-based search over a discrete space.

Both searchers are written against a *trial runner*: any callable
``run_trial(config, seed) -> TrialRecord``. :func:`make_trial_runner` builds
one that trains a real detector and scores it with the contrast score
margin; tests plug in cheap synthetic objectives instead.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from ..detectors import DetectorSpec, run_detector
from ..errors import ResourceLimitError, SearchError, TrainingError, ValidationError
from ..internal_eval import IMPROVED, csm
from .gp import GaussianProcess, expected_improvement
from .space import Configuration, HyperparameterSpace, TrialRecord, TrialStatus


@dataclass
class SearchResult:
    best: Configuration
    trials: list[TrialRecord]

    @property
    def best_trial(self) -> TrialRecord:
        return next(t for t in self.trials if t.config == self.best and t.ok)


def select_best(trials) -> TrialRecord:
    """Highest T among ok trials; equal T resolves to the smallest configuration."""
    ok = [t for t in trials if t.ok]
    if not ok:
        raise SearchError(f"all {len(trials)} trials failed")
    # max() keeps the first maximal element, so sort ascending first
    return max(sorted(ok, key=lambda t: t.config), key=lambda t: t.t_value)


class ScoreCache:
    """In-memory store of detector outputs keyed by graph, detector, config and seed."""

    def __init__(self):
        self._store = {}
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(graph_hash, spec: DetectorSpec):
        hp = tuple(sorted(spec.hyperparameters.items()))
        training = tuple(sorted(spec.training.to_dict().items()))
        return (graph_hash, spec.kind, hp, training, spec.seed)

    def get(self, key):
        if key in self._store:
            self.hits += 1
            return self._store[key]
        self.misses += 1
        return None

    def put(self, key, value):
        self._store[key] = value

    def __len__(self):
        return len(self._store)


def make_trial_runner(template: DetectorSpec, g, k, variant=IMPROVED, *, cache=None,
                      underfit_window=400, underfit_tol=1e-2, time_budget=None):
    """Return ``run_trial(config, seed)`` for one detector on one graph.

    The graph is stripped of labels once, up front. Training failures are
    recorded on the trial instead of raised: non-finite values become
    ``failed_nan``, the dense-size ceiling ``failed_oom``, a wall-clock
    overrun ``failed_oor``, and a loss that moved less than
    ``underfit_tol`` over the last ``underfit_window`` epochs
    ``failed_underfit`` (checked only when training is longer than the
    window).
    """
    graph = g.without_labels()
    ghash = graph.content_hash()

    def run_trial(config: Configuration, seed: int) -> TrialRecord:
        spec = template.with_config(config.as_dict(), seed=seed)
        key = ScoreCache.key(ghash, spec)
        entry = cache.get(key) if cache is not None else None
        if entry is None:
            start = time.perf_counter()
            try:
                result = run_detector(graph, spec)
                entry = ("ok", result.scores, list(result.loss_history), time.perf_counter() - start, "")
            except TrainingError as exc:
                entry = (TrialStatus.FAILED_NAN, None, [], time.perf_counter() - start, str(exc))
            except ResourceLimitError as exc:
                entry = (TrialStatus.FAILED_OOM, None, [], time.perf_counter() - start, str(exc))
            if cache is not None:
                cache.put(key, entry)
        status, scores, history, elapsed, message = entry
        if status != "ok":
            return TrialRecord(config, seed, None, None, status, message=message)
        if time_budget is not None and elapsed > time_budget:
            return TrialRecord(config, seed, scores, None, TrialStatus.FAILED_OOR,
                               message=f"{elapsed:.1f}s > {time_budget}s")
        if len(history) > underfit_window and abs(history[-1] - history[-1 - underfit_window]) < underfit_tol:
            return TrialRecord(config, seed, scores, None, TrialStatus.FAILED_UNDERFIT,
                               message=f"loss moved < {underfit_tol} over {underfit_window} epochs")
        report = csm(scores, k, variant)
        return TrialRecord(config, seed, scores, report.value, csm=report)

    return run_trial


def grid_search(run_trial, space: HyperparameterSpace, seed=0) -> SearchResult:
    """Evaluate every configuration once and keep the T-maximizer."""
    if space.size < 1:
        raise ValidationError("empty space")
    trials = [run_trial(cfg, seed) for cfg in space]
    return SearchResult(select_best(trials).config, trials)


def _surrogate_targets(trials):
    """Finite GP targets: failures sit below, +inf above, the observed range."""
    finite = [t.t_value for t in trials if t.ok and math.isfinite(t.t_value)]
    if not finite:
        return np.zeros(len(trials))
    lo, hi = min(finite), max(finite)
    spread = (hi - lo) or 1.0
    floor, ceil = lo - 3 * spread, hi + 3 * spread
    out = []
    for t in trials:
        if not t.ok or t.t_value == -math.inf:
            out.append(floor)
        elif t.t_value == math.inf:
            out.append(ceil)
        else:
            out.append(t.t_value)
    return np.array(out)


def smbo_search(run_trial, space: HyperparameterSpace, *, init_j=5, budget=15, pool_size=64, seed=0,
                length_scale=0.3, jitter=1e-6) -> SearchResult:
    """Sequential model-based search with a GP surrogate and Expected Improvement.

    ``init_j`` configurations are drawn uniformly without replacement and
    evaluated. Each further iteration fits the GP on all evaluated pairs,
    draws up to ``pool_size`` not-yet-evaluated configurations, and evaluates
    the one with the largest EI (ties to the smallest configuration). Stops
    after exactly ``budget`` evaluations.
    """
    m = space.size
    if init_j < 2:
        raise ValidationError("init_j must be >= 2")
    if budget < init_j:
        raise ValidationError("budget must be >= init_j")
    if budget > m:
        raise ValidationError(f"budget={budget} exceeds the {m} configurations in the space")
    if pool_size < 1:
        raise ValidationError("pool_size must be >= 1")

    configs = space.configurations()
    coords = np.array([space.scaled(c) for c in configs])
    rng = np.random.default_rng(seed)
    evaluated = [int(i) for i in rng.choice(m, size=init_j, replace=False)]
    trials = [run_trial(configs[i], seed) for i in evaluated]

    gp = GaussianProcess(length_scale=length_scale, jitter=jitter)
    while len(trials) < budget:
        gp.fit(coords[evaluated], _surrogate_targets(trials))
        done = set(evaluated)
        remaining = np.array([i for i in range(m) if i not in done])
        if pool_size < len(remaining):
            pool = np.sort(rng.choice(remaining, size=pool_size, replace=False))
        else:
            pool = remaining
        mean, std = gp.predict(coords[pool])
        ei = expected_improvement(mean, std, gp.incumbent)
        pick = int(pool[int(np.argmax(ei))])
        evaluated.append(pick)
        trials.append(run_trial(configs[pick], seed))
    return SearchResult(select_best(trials).config, trials)
