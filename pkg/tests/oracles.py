"""Independent reference implementations used only by tests.

Each oracle follows the textbook definition as literally as possible and
shares no code with the package.
"""

import math
import statistics


def csm_literal(scores, k, variant):
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    top = [scores[i] for i in order[:k]]
    rest = [scores[i] for i in order[k:2 * k]] if variant == "original" else [scores[i] for i in order[k:]]
    mu_o, mu_i = statistics.fmean(top), statistics.fmean(rest)
    var_o, var_i = statistics.pvariance(top), statistics.pvariance(rest)
    num = mu_o - mu_i
    if variant == "original":
        denom = math.sqrt((1.0 / k) * (var_o + var_i))
    else:
        denom = math.sqrt(var_o + var_i)
    if denom == 0:
        return math.inf if num > 0 else (-math.inf if num < 0 else 0.0)
    return num / denom


def auc_pairwise(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    won = 0.0
    for p in pos:
        for q in neg:
            won += 1.0 if p > q else (0.5 if p == q else 0.0)
    return won / (len(pos) * len(neg))


def central_difference(f, x, eps=1e-5):
    """Numerical gradient of scalar ``f`` w.r.t. every entry of array ``x`` (modified in place, restored)."""
    grad = [[0.0] * x.shape[1] for _ in range(x.shape[0])]
    for i in range(x.shape[0]):
        for j in range(x.shape[1]):
            orig = x[i, j]
            x[i, j] = orig + eps
            up = f()
            x[i, j] = orig - eps
            down = f()
            x[i, j] = orig
            grad[i][j] = (up - down) / (2 * eps)
    return grad


def max_relative_error(analytic, numeric):
    worst = 0.0
    for row_a, row_n in zip(analytic, numeric):
        for a, n in zip(row_a, row_n):
            worst = max(worst, abs(a - n) / max(1.0, abs(n)))
    return worst


def gradient_check(params, loss_fn, eps=1e-5):
    """Worst relative error between taped gradients and central differences.

    ``params`` are objects exposing ``.tensor.value`` (modified in place and
    restored); ``loss_fn`` rebuilds the tape and returns a scalar tensor.
    """
    from gadtune.tensor import backward

    for p in params:
        p.tensor.grad = None
    backward(loss_fn())
    worst = 0.0
    for p in params:
        analytic = p.tensor.grad.tolist()
        numeric = central_difference(lambda: loss_fn().item(), p.tensor.value, eps)
        worst = max(worst, max_relative_error(analytic, numeric))
    return worst
