"""Gaussian-process surrogate with a fixed RBF kernel, and Expected Improvement."""

from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.stats import norm

from ..errors import ValidationError


class SurrogateError(ArithmeticError):
    """The kernel matrix could not be factorized."""


def expected_improvement(eta, sigma, incumbent):
    """Closed-form EI, ``(pdf(z) + z * cdf(z)) * sigma`` with ``z = (eta - incumbent) / sigma``.

    Where ``sigma == 0`` the standardized improvement is taken as 0, which
    makes EI vanish. Works elementwise on arrays; scalars in, float out.
    """
    eta = np.asarray(eta, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    if np.any(sigma < 0):
        raise ValidationError("sigma must be >= 0")
    pos = sigma > 0
    gap = np.broadcast_to(eta - incumbent, np.broadcast(eta, sigma).shape)
    with np.errstate(over="ignore", divide="ignore"):
        z = np.divide(gap, sigma, out=np.zeros(gap.shape), where=pos)
        # z * sigma == gap; writing it that way stays finite when z overflows
        ei = np.where(pos, sigma * norm.pdf(z) + gap * norm.cdf(z), 0.0)
    # pdf(z) + z*cdf(z) >= 0 analytically; clip rounding noise in the far tail
    ei = np.maximum(ei, 0.0)
    return float(ei) if ei.ndim == 0 else ei


class GaussianProcess:
    """Exact GP regression on min-max scaled inputs.

    Hyperparameters are fixed: RBF length scale, unit signal variance on the
    standardized targets, and a diagonal jitter. Targets are centred on
    their mean and divided by their standard deviation before fitting;
    predictions are mapped back to the original units.
    """

    def __init__(self, length_scale=0.3, signal_variance=1.0, jitter=1e-6):
        self.length_scale = float(length_scale)
        self.signal_variance = float(signal_variance)
        self.jitter = float(jitter)
        self.x = None
        self.y = None

    def kernel(self, a, b):
        a = np.atleast_2d(a)
        b = np.atleast_2d(b)
        sq = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=-1)
        return self.signal_variance * np.exp(-0.5 * sq / self.length_scale ** 2)

    def fit(self, x, y) -> GaussianProcess:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        y = np.asarray(y, dtype=np.float64).ravel()
        if len(x) != len(y):
            raise ValidationError("x and y lengths differ")
        if len(y) < 2:
            raise ValidationError("GP needs at least two observations")
        if not np.isfinite(y).all():
            raise ValidationError("GP targets must be finite")
        self.x, self.y = x, y
        self.y_mean = float(y.mean())
        sd = float(y.std())
        self.y_scale = sd if sd > 0 else 1.0
        k = self.kernel(x, x) + self.jitter * np.eye(len(x))
        try:
            self._chol = cho_factor(k, lower=True)
        except LinAlgError as exc:
            raise SurrogateError(f"kernel matrix is not positive definite: {exc}") from exc
        self._alpha = cho_solve(self._chol, (y - self.y_mean) / self.y_scale)
        return self

    def predict(self, x):
        """Posterior mean and standard deviation at each row of ``x``."""
        if self.x is None:
            raise ValidationError("predict() before fit()")
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        ks = self.kernel(x, self.x)
        mean = ks @ self._alpha
        v = cho_solve(self._chol, ks.T)
        var = self.signal_variance - np.einsum("ij,ji->i", ks, v)
        var = np.maximum(var, 0.0)
        return self.y_mean + self.y_scale * mean, self.y_scale * np.sqrt(var)

    @property
    def incumbent(self) -> float:
        return float(self.y.max())
