"""Label-free scoring of anomaly-score vectors by Contrast Score Margin.

The top-``k`` scores are the predicted anomalies. The *original* margin
compares them with the next ``k`` scores and keeps a ``1/k`` factor under
the root; the *improved* margin compares them with all remaining ``n - k``
scores::

    original:  (mean_top - mean_next) / sqrt((var_top + var_next) / k)
    improved:  (mean_top - mean_rest) / sqrt(var_top + var_rest)

Variances are population variances. A zero denominator never divides:
the value becomes ``+inf``/``-inf``/``0`` according to the sign of the
numerator, so perfect separation outranks any finite margin.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ValidationError

ORIGINAL = "original"
IMPROVED = "improved"
VARIANTS = (ORIGINAL, IMPROVED)


@dataclass(frozen=True)
class CsmReport:
    k: int
    mu_top: float
    var_top: float
    mu_rest: float
    var_rest: float
    value: float
    variant: str
    degenerate: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        if math.isinf(self.value):
            d["value"] = "inf" if self.value > 0 else "-inf"
        return d

    @classmethod
    def from_dict(cls, d: dict) -> CsmReport:
        d = dict(d)
        d["value"] = float(d["value"])
        return cls(**d)

    def recompute(self) -> float:
        """Re-evaluate the margin formula from the stored components."""
        num = self.mu_top - self.mu_rest
        if self.variant == ORIGINAL:
            denom = math.sqrt((self.var_top + self.var_rest) / self.k)
        else:
            denom = math.sqrt(self.var_top + self.var_rest)
        return _margin(num, denom)[0]


def _margin(num, denom):
    if denom > 0.0:
        return num / denom, False
    if num > 0.0:
        return math.inf, True
    if num < 0.0:
        return -math.inf, True
    return 0.0, True


def rank_order(scores) -> np.ndarray:
    """Node ids sorted by descending score, ties by ascending id."""
    s = np.asarray(scores, dtype=np.float64)
    return np.argsort(-s, kind="stable")


def top_k(scores, k) -> np.ndarray:
    return rank_order(scores)[:k]


def _validate(scores, k):
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1:
        raise ValidationError("score vector must be 1-D")
    if not np.isfinite(s).all():
        raise ValidationError("score vector contains non-finite values")
    if isinstance(k, bool) or int(k) != k:
        raise ValidationError(f"k={k!r} is not an integer")
    return s, int(k)


def csm_original(scores, k) -> CsmReport:
    """Margin between the top ``k`` scores and the ``k`` scores right below them."""
    s, k = _validate(scores, k)
    n = len(s)
    if not 1 <= k <= n // 2:
        raise ValidationError(f"k={k} outside [1, {n // 2}] for n={n}")
    ranked = s[rank_order(s)]
    top, nxt = ranked[:k], ranked[k:2 * k]
    mu_o, var_o = float(top.mean()), float(top.var())
    mu_i, var_i = float(nxt.mean()), float(nxt.var())
    value, degenerate = _margin(mu_o - mu_i, math.sqrt((var_o + var_i) / k))
    return CsmReport(k, mu_o, var_o, mu_i, var_i, value, ORIGINAL, degenerate)


def csm_improved(scores, k) -> CsmReport:
    """Margin between the top ``k`` scores and all remaining ``n - k`` scores."""
    s, k = _validate(scores, k)
    n = len(s)
    if not 1 <= k < n:
        raise ValidationError(f"k={k} outside [1, {n - 1}] for n={n}")
    ranked = s[rank_order(s)]
    top, rest = ranked[:k], ranked[k:]
    mu_o, var_o = float(top.mean()), float(top.var())
    mu_i, var_i = float(rest.mean()), float(rest.var())
    value, degenerate = _margin(mu_o - mu_i, math.sqrt(var_o + var_i))
    return CsmReport(k, mu_o, var_o, mu_i, var_i, value, IMPROVED, degenerate)


def csm(scores, k, variant=IMPROVED) -> CsmReport:
    if variant == ORIGINAL:
        return csm_original(scores, k)
    if variant == IMPROVED:
        return csm_improved(scores, k)
    raise ValidationError(f"unknown CSM variant {variant!r}")


def choose_k(n, assumed_ratio) -> int:
    """Number of predicted anomalies for an assumed contamination ratio."""
    if not 0.0 < assumed_ratio < 0.5:
        raise ValidationError(f"assumed_ratio={assumed_ratio} outside (0, 0.5)")
    return max(1, int(round(assumed_ratio * n)))


def cantelli_margin(report: CsmReport, a, b=None) -> float:
    """``(mu_top - a*sd_top) - (mu_rest + b*sd_rest)``, the gap between the two tail bounds."""
    b = a if b is None else b
    return (report.mu_top - a * math.sqrt(report.var_top)) - (report.mu_rest + b * math.sqrt(report.var_rest))


# -- one-sided Chebyshev (Cantelli) bound checks ------------------------------


@dataclass(frozen=True)
class Sampler:
    """A distribution with known mean and standard deviation."""

    name: str
    mean: float
    std: float
    draw: object  # callable (rng, size) -> ndarray

    def __call__(self, rng, size):
        return self.draw(rng, size)


def normal_sampler(mu=0.0, sigma=1.0) -> Sampler:
    return Sampler("normal", mu, sigma, lambda rng, size: rng.normal(mu, sigma, size))


def uniform_sampler(low=0.0, high=1.0) -> Sampler:
    return Sampler("uniform", (low + high) / 2, (high - low) / math.sqrt(12), lambda rng, size: rng.uniform(low, high, size))


def exponential_sampler(rate=1.0) -> Sampler:
    return Sampler("exponential", 1.0 / rate, 1.0 / rate, lambda rng, size: rng.exponential(1.0 / rate, size))


def bimodal_sampler(sep=3.0, sigma=0.5, weight=0.5) -> Sampler:
    """Two-component Gaussian mixture at ``-sep/2`` and ``+sep/2``."""
    lo, hi = -sep / 2, sep / 2
    mean = weight * lo + (1 - weight) * hi
    second = weight * (lo ** 2 + sigma ** 2) + (1 - weight) * (hi ** 2 + sigma ** 2)
    std = math.sqrt(second - mean ** 2)

    def draw(rng, size):
        pick = rng.random(size) < weight
        return np.where(pick, lo, hi) + rng.normal(0.0, sigma, size)

    return Sampler("bimodal", mean, std, draw)


def cantelli_check(dist: Sampler, a, trials=100_000, seed=0):
    """Empirical ``P(X <= mean - a*std)`` alongside the bound ``1 / (1 + a^2)``."""
    if a < 0:
        raise ValidationError("a must be >= 0")
    if trials < 10_000:
        raise ValidationError("trials must be >= 10^4")
    if not dist.std > 0:
        raise ValidationError("sampler has zero variance")
    rng = np.random.default_rng(seed)
    x = dist(rng, trials)
    empirical = float(np.mean(x <= dist.mean - a * dist.std))
    return empirical, 1.0 / (1.0 + a * a)
