"""GCN autoencoder that reconstructs both attributes and adjacency.

Encoder: two GCN layers, ReLU after the first only; a non-negative
embedding would pin ``sigmoid(Z Z^T)`` at or above 0.5. Attribute decoder: one linear GCN layer
back to the attribute space. Structure decoder: ``sigmoid(Z Z^T)``.
Both reconstruction losses are divided by their element counts so that the
trade-off weight ``alpha`` compares quantities of similar scale.
"""

from __future__ import annotations

import numpy as np

from .. import tensor as T
from ..errors import ResourceLimitError, TrainingError
from ..graph import AttributedGraph, normalized_adjacency
from .base import GENERATIVE, DetectorResult, DetectorSpec, finalize_scores


class GraphAutoencoder:
    def __init__(self, g: AttributedGraph, training, rng):
        self.op = normalized_adjacency(g)
        self.x = g.attributes
        self.a = g.adjacency().toarray()
        d = g.d
        h, e = training.hidden_dim, training.embed_dim
        self.params = [
            T.glorot_uniform(d, h, rng, name="enc1"),
            T.glorot_uniform(h, e, rng, name="enc2"),
            T.glorot_uniform(e, d, rng, name="dec_attr"),
        ]

    def forward(self):
        w1, w2, w3 = (p.tensor for p in self.params)
        h = T.relu(T.sparse_matmul(self.op, T.matmul(self.x, w1)))
        z = T.sparse_matmul(self.op, T.matmul(h, w2))
        x_hat = T.sparse_matmul(self.op, T.matmul(z, w3))
        a_hat = T.sigmoid(T.matmul(z, T.transpose(z)))
        return x_hat, a_hat

    def losses(self):
        """Per-element attribute and structure reconstruction losses."""
        x_hat, a_hat = self.forward()
        attr = T.scale(T.frobenius_sq(T.sub(self.x, x_hat)), 1.0 / self.x.size)
        struct = T.scale(T.frobenius_sq(T.sub(self.a, a_hat)), 1.0 / self.a.size)
        return attr, struct

    def loss(self, alpha):
        attr, struct = self.losses()
        return T.add(T.scale(attr, alpha), T.scale(struct, 1.0 - alpha))

    def error_norms(self):
        """Row-wise attribute and structure reconstruction errors."""
        x_hat, a_hat = self.forward()
        attr = np.linalg.norm(self.x - x_hat.value, axis=1)
        struct = np.linalg.norm(self.a - a_hat.value, axis=1)
        return attr, struct


def train_generative(g: AttributedGraph, spec: DetectorSpec) -> DetectorResult:
    """Train the autoencoder and score nodes by weighted reconstruction error.

    ``s_i = alpha * ||x_i - x_hat_i|| + (1 - alpha) * ||a_i - a_hat_i||``.
    Raises :class:`ResourceLimitError` when the graph exceeds the dense-size
    ceiling and :class:`TrainingError` when the loss becomes non-finite.
    """
    if spec.kind != GENERATIVE:
        raise ValueError(f"expected a {GENERATIVE} spec, got {spec.kind}")
    cfg = spec.training
    if g.n > cfg.max_dense_nodes:
        raise ResourceLimitError(f"n={g.n} exceeds max_dense_nodes={cfg.max_dense_nodes}")
    alpha = float(spec.hyperparameters["alpha"])
    rng = np.random.default_rng(spec.seed)
    model = GraphAutoencoder(g, cfg, rng)

    history = []
    for _ in range(cfg.epochs):
        loss = model.loss(alpha)
        value = loss.item()
        if not np.isfinite(value):
            raise TrainingError(f"non-finite loss at epoch {len(history)}")
        history.append(value)
        T.backward(loss)
        T.adam_step(model.params, lr=cfg.learning_rate)

    attr, struct = model.error_norms()
    scores = alpha * attr + (1.0 - alpha) * struct
    if not np.isfinite(scores).all():
        raise TrainingError("non-finite anomaly scores")
    return DetectorResult(finalize_scores(scores), history)
