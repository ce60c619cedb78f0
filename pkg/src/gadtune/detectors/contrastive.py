"""Contrastive ego-net detector with node-node and node-subgraph agreement.

Simplified multi-view design: every target node gets two RWR ego-nets per
epoch. Inside an ego-net the target's own attributes are masked.

* node-subgraph: the target's unmasked embedding is scored by a bilinear
  discriminator against the mean embedding of the other ego-net members
  (positive) and against another target's ego-net readout (negative);
* node-node: the masked target's in-ego-net embedding is scored against the
  target's unmasked embedding (positive) and another node's (negative).

Both perspectives have their own one-layer GCN encoder and discriminator.
The loss is ``(1 - alpha) * L_nn + alpha * L_ns``; scores are the same
alpha-weighted combination of ``sigmoid(negative) - sigmoid(positive)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import tensor as T
from ..errors import TrainingError, ValidationError
from ..graph import AttributedGraph
from .base import CONTRASTIVE, DetectorResult, DetectorSpec, finalize_scores
from .sampling import SubgraphBatch, component_sizes, rwr_egonets

VIEWS = 2


def derangement(m, rng):
    """Random permutation without fixed points (for m >= 2)."""
    order = rng.permutation(m)
    out = np.empty(m, dtype=np.int64)
    out[order] = np.roll(order, -1)
    return out


@dataclass
class ContrastBatch:
    views: list[SubgraphBatch]
    negatives: np.ndarray  # partner index for negative pairs


class ContrastiveEgoNet:
    def __init__(self, g: AttributedGraph, training, rng):
        if g.n < 2:
            raise ValidationError("contrastive detector needs at least two nodes")
        self.adj = g.adjacency()
        self.x = g.attributes
        self.comp_sizes = component_sizes(self.adj)
        self.restart_prob = training.restart_prob
        d, h = g.d, training.hidden_dim
        self.params = [
            T.glorot_uniform(d, h, rng, name="enc_ns"),
            T.glorot_uniform(h, h, rng, name="disc_ns"),
            T.glorot_uniform(d, h, rng, name="enc_nn"),
            T.glorot_uniform(h, h, rng, name="disc_nn"),
        ]

    def sample(self, size, rng, views=VIEWS) -> ContrastBatch:
        targets = np.arange(self.x.shape[0])
        batches = []
        for _ in range(views):
            nodes = rwr_egonets(self.adj, targets, size, rng, self.restart_prob, self.comp_sizes)
            batches.append(SubgraphBatch(self.adj, self.x, nodes))
        return ContrastBatch(batches, derangement(len(targets), rng))

    def logits(self, batch: ContrastBatch):
        """Positive/negative logits per view for both perspectives."""
        w_ns, b_ns, w_nn, b_nn = (p.tensor for p in self.params)
        own_ns = T.relu(T.matmul(self.x, w_ns))
        own_nn = T.relu(T.matmul(self.x, w_nn))
        neg = batch.negatives
        out = []
        for view in batch.views:
            h_ns = T.relu(T.sparse_matmul(view.op, T.matmul(view.features, w_ns)))
            readout = T.sparse_matmul(view.readout, h_ns)
            q_ns = T.matmul(own_ns, b_ns)
            ns_pos = T.rowwise_dot(q_ns, readout)
            ns_neg = T.rowwise_dot(q_ns, T.gather_rows(readout, neg))

            h_nn = T.relu(T.sparse_matmul(view.op, T.matmul(view.features, w_nn)))
            masked = T.gather_rows(h_nn, view.target_rows)
            q_nn = T.matmul(masked, b_nn)
            nn_pos = T.rowwise_dot(q_nn, own_nn)
            nn_neg = T.rowwise_dot(q_nn, T.gather_rows(own_nn, neg))
            out.append((ns_pos, ns_neg, nn_pos, nn_neg))
        return out

    def losses(self, batch: ContrastBatch):
        """Node-subgraph and node-node BCE losses averaged over views."""
        ns_terms, nn_terms = [], []
        for ns_pos, ns_neg, nn_pos, nn_neg in self.logits(batch):
            ns_terms += [T.bce_with_logits(ns_pos, 1.0), T.bce_with_logits(ns_neg, 0.0)]
            nn_terms += [T.bce_with_logits(nn_pos, 1.0), T.bce_with_logits(nn_neg, 0.0)]
        return _average(ns_terms), _average(nn_terms)

    def loss(self, batch: ContrastBatch, alpha):
        l_ns, l_nn = self.losses(batch)
        return T.add(T.scale(l_nn, 1.0 - alpha), T.scale(l_ns, alpha))

    def round_scores(self, batch: ContrastBatch, alpha) -> np.ndarray:
        parts = []
        sig = T._stable_sigmoid
        for ns_pos, ns_neg, nn_pos, nn_neg in self.logits(batch):
            ns = sig(ns_neg.value) - sig(ns_pos.value)
            nn = sig(nn_neg.value) - sig(nn_pos.value)
            parts.append((alpha * ns + (1.0 - alpha) * nn).ravel())
        return np.mean(parts, axis=0)


def _average(terms):
    acc = terms[0]
    for t in terms[1:]:
        acc = T.add(acc, t)
    return T.scale(acc, 1.0 / len(terms))


def train_contrastive(g: AttributedGraph, spec: DetectorSpec) -> DetectorResult:
    """Train the ego-net contrast model and score nodes over several rounds.

    Each scoring round draws fresh ego-nets and negatives; the final score is
    the mean over ``spec.training.rounds`` rounds.
    """
    if spec.kind != CONTRASTIVE:
        raise ValueError(f"expected a {CONTRASTIVE} spec, got {spec.kind}")
    size = int(spec.hyperparameters["K"])
    if size < 2:
        raise ValidationError("K must be >= 2")
    if size >= g.n:
        raise ValidationError(f"K={size} must be smaller than n={g.n}")
    alpha = float(spec.hyperparameters["alpha"])
    cfg = spec.training
    init_seq, sample_seq, score_seq = np.random.SeedSequence(spec.seed).spawn(3)
    model = ContrastiveEgoNet(g, cfg, np.random.default_rng(init_seq))
    rng = np.random.default_rng(sample_seq)

    history = []
    for _ in range(cfg.epochs):
        loss = model.loss(model.sample(size, rng), alpha)
        value = loss.item()
        if not np.isfinite(value):
            raise TrainingError(f"non-finite loss at epoch {len(history)}")
        history.append(value)
        T.backward(loss)
        T.adam_step(model.params, lr=cfg.learning_rate)

    rng = np.random.default_rng(score_seq)
    rounds = np.stack([model.round_scores(model.sample(size, rng), alpha) for _ in range(cfg.rounds)])
    if not np.isfinite(rounds).all():
        raise TrainingError("non-finite anomaly scores")
    return DetectorResult(finalize_scores(rounds), history)
