"""Dense 2-D tensors with tape-based reverse-mode gradients and Adam.

Every op returns a new :class:`Tensor` that remembers its parents and a
closure that pushes the upstream gradient back to them. A fresh tape is built
by each forward pass; :func:`backward` walks it in reverse topological order.
Scalars are ``(1, 1)`` tensors.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import ShapeError, TrainingError, ValidationError

DEBUG = bool(os.environ.get("GADTUNE_DEBUG"))


class Tensor:
    __slots__ = ("value", "grad", "requires_grad", "_parents", "_backward", "name")

    def __init__(self, value, requires_grad=False, name=None):
        value = np.asarray(value, dtype=np.float64)
        if value.ndim == 0:
            value = value.reshape(1, 1)
        elif value.ndim == 1:
            value = value.reshape(1, -1)
        if value.ndim != 2:
            raise ShapeError(f"tensors are 2-D, got shape {value.shape}")
        self.value = value
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._backward = None
        self.name = name

    @property
    def shape(self):
        return self.value.shape

    def item(self) -> float:
        if self.value.shape != (1, 1):
            raise ShapeError(f"item() on non-scalar of shape {self.shape}")
        return float(self.value[0, 0])

    def zero_grad(self):
        self.grad = np.zeros_like(self.value)

    def __repr__(self):
        tag = f" {self.name}" if self.name else ""
        return f"Tensor{tag}(shape={self.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __matmul__(self, other):
        return matmul(self, other)


def _as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _result(value, parents, backward_fn):
    out = Tensor(value)
    if DEBUG and not np.isfinite(out.value).all():
        raise TrainingError("non-finite value in forward pass")
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward_fn
    return out


def _accumulate(t, g):
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = np.array(g, dtype=np.float64, copy=True)
    else:
        t.grad += g


def _check_same(a, b, op):
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} differ")


# -- forward ops ------------------------------------------------------------


def matmul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: {a.shape} @ {b.shape}")

    def bw(g):
        if a.requires_grad:
            _accumulate(a, g @ b.value.T)
        if b.requires_grad:
            _accumulate(b, a.value.T @ g)

    return _result(a.value @ b.value, (a, b), bw)


def sparse_matmul(op, t):
    """``op @ t`` for a constant scipy sparse (or dense ndarray) operator."""
    t = _as_tensor(t)
    if op.shape[1] != t.shape[0]:
        raise ShapeError(f"sparse_matmul: {op.shape} @ {t.shape}")
    op_t = op.T

    def bw(g):
        _accumulate(t, np.asarray(op_t @ g))

    return _result(np.asarray(op @ t.value), (t,), bw)


def add(a, b):
    """Elementwise sum; ``b`` may also be a ``(1, cols)`` row added to every row."""
    a, b = _as_tensor(a), _as_tensor(b)
    if a.shape == b.shape:
        def bw(g):
            _accumulate(a, g)
            _accumulate(b, g)
    elif b.shape == (1, a.shape[1]):
        def bw(g):
            _accumulate(a, g)
            _accumulate(b, g.sum(axis=0, keepdims=True))
    else:
        raise ShapeError(f"add: shapes {a.shape} and {b.shape} are incompatible")
    return _result(a.value + b.value, (a, b), bw)


def sub(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    _check_same(a, b, "sub")

    def bw(g):
        _accumulate(a, g)
        _accumulate(b, -g)

    return _result(a.value - b.value, (a, b), bw)


def mul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    _check_same(a, b, "mul")

    def bw(g):
        _accumulate(a, g * b.value)
        _accumulate(b, g * a.value)

    return _result(a.value * b.value, (a, b), bw)


def scale(a, c: float):
    a = _as_tensor(a)
    c = float(c)

    def bw(g):
        _accumulate(a, c * g)

    return _result(c * a.value, (a,), bw)


def transpose(a):
    a = _as_tensor(a)

    def bw(g):
        _accumulate(a, g.T)

    return _result(a.value.T.copy(), (a,), bw)


def relu(a):
    a = _as_tensor(a)
    out = np.maximum(a.value, 0.0)

    def bw(g):
        _accumulate(a, g * (out > 0))

    return _result(out, (a,), bw)


def _stable_sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(a):
    a = _as_tensor(a)
    s = _stable_sigmoid(a.value)

    def bw(g):
        _accumulate(a, g * s * (1.0 - s))

    return _result(s, (a,), bw)


def row_l2_norm(a):
    """Euclidean norm of each row, shape ``(rows, 1)``."""
    a = _as_tensor(a)
    norms = np.sqrt((a.value ** 2).sum(axis=1, keepdims=True))

    def bw(g):
        safe = np.where(norms > 0, norms, 1.0)
        _accumulate(a, g * np.where(norms > 0, a.value / safe, 0.0))

    return _result(norms, (a,), bw)


def frobenius_sq(a):
    a = _as_tensor(a)

    def bw(g):
        _accumulate(a, 2.0 * g[0, 0] * a.value)

    return _result(np.array([[np.sum(a.value ** 2)]]), (a,), bw)


def total(a):
    a = _as_tensor(a)

    def bw(g):
        _accumulate(a, np.full_like(a.value, g[0, 0]))

    return _result(np.array([[a.value.sum()]]), (a,), bw)


def mean(a):
    a = _as_tensor(a)
    size = a.value.size

    def bw(g):
        _accumulate(a, np.full_like(a.value, g[0, 0] / size))

    return _result(np.array([[a.value.mean()]]), (a,), bw)


def gather_rows(a, index):
    a = _as_tensor(a)
    index = np.asarray(index, dtype=np.int64)

    def bw(g):
        if not a.requires_grad:
            return
        full = np.zeros_like(a.value)
        if len(np.unique(index)) == len(index):
            full[index] = g
        else:
            np.add.at(full, index, g)
        _accumulate(a, full)

    return _result(a.value[index], (a,), bw)


def rowwise_dot(a, b):
    """``sum(a * b, axis=1)`` as a ``(rows, 1)`` column."""
    a, b = _as_tensor(a), _as_tensor(b)
    _check_same(a, b, "rowwise_dot")

    def bw(g):
        _accumulate(a, g * b.value)
        _accumulate(b, g * a.value)

    return _result((a.value * b.value).sum(axis=1, keepdims=True), (a, b), bw)


def bce_with_logits(logits, target: float):
    """Mean binary cross-entropy of ``sigmoid(logits)`` against a constant 0/1 target."""
    logits = _as_tensor(logits)
    x = logits.value
    t = float(target)
    loss = np.maximum(x, 0.0) - x * t + np.log1p(np.exp(-np.abs(x)))
    size = x.size

    def bw(g):
        _accumulate(logits, g[0, 0] * (_stable_sigmoid(x) - t) / size)

    return _result(np.array([[loss.mean()]]), (logits,), bw)


# -- reverse pass ---------------------------------------------------------


def _topological(root):
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    return order


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(leaf) into ``.grad`` of every reachable leaf."""
    if loss.shape != (1, 1):
        raise ValidationError(f"backward() needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        return
    order = _topological(loss)
    interior = [t for t in order if t._backward is not None]
    for t in interior:
        t.grad = None
    loss.grad = np.ones((1, 1))
    for t in reversed(order):
        if t._backward is not None and t.grad is not None:
            t._backward(t.grad)


# -- parameters and Adam ----------------------------------------------------


class Parameter:
    """A trainable leaf tensor plus its Adam moment estimates."""

    __slots__ = ("tensor", "adam_m", "adam_v", "step_count")

    def __init__(self, value, name=None):
        self.tensor = Tensor(np.array(value, dtype=np.float64, copy=True), requires_grad=True, name=name)
        self.tensor.zero_grad()
        self.adam_m = np.zeros_like(self.tensor.value)
        self.adam_v = np.zeros_like(self.tensor.value)
        self.step_count = 0

    @property
    def value(self):
        return self.tensor.value

    @property
    def grad(self):
        return self.tensor.grad

    def zero_grad(self):
        self.tensor.zero_grad()

    def __repr__(self):
        return f"Parameter({self.tensor.name}, shape={self.tensor.shape})"


def glorot_uniform(fan_in, fan_out, rng, name=None) -> Parameter:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return Parameter(rng.uniform(-limit, limit, size=(fan_in, fan_out)), name=name)


def adam_step(params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8) -> None:
    """One bias-corrected Adam update; gradients are zeroed afterwards."""
    for p in params:
        g = p.tensor.grad
        if g is None:
            g = np.zeros_like(p.value)
        if not np.isfinite(g).all():
            bad = int((~np.isfinite(g)).sum())
            raise TrainingError(f"non-finite gradient in {p.tensor.name or 'parameter'} ({bad} entries)")
        p.step_count += 1
        p.adam_m *= beta1
        p.adam_m += (1.0 - beta1) * g
        p.adam_v *= beta2
        p.adam_v += (1.0 - beta2) * g * g
        m_hat = p.adam_m / (1.0 - beta1 ** p.step_count)
        v_hat = p.adam_v / (1.0 - beta2 ** p.step_count)
        p.tensor.value -= lr * m_hat / (np.sqrt(v_hat) + eps)
        p.zero_grad()
