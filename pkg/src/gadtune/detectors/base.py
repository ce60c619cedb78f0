"""Detector specification, results, and score finalization."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ..errors import ValidationError

GENERATIVE = "generative_ae"
CONTRASTIVE = "contrastive_egonet"

# hyperparameters each detector kind is searched over
KIND_HYPERPARAMETERS = {
    GENERATIVE: ("alpha",),
    CONTRASTIVE: ("alpha", "K"),
}


@dataclass(frozen=True)
class TrainingConfig:
    """Fixed training settings; these are never searched.

    ``hidden_dim`` is the first GCN width of the autoencoder and the output
    width of the contrastive encoders. ``rounds`` is the number of scoring
    rounds for the contrastive detector. Graphs with more than
    ``max_dense_nodes`` nodes are refused by the autoencoder, which builds a
    dense n x n reconstruction.
    """

    epochs: int = 100
    learning_rate: float = 1e-3
    hidden_dim: int = 64
    embed_dim: int = 32
    rounds: int = 16
    restart_prob: float = 0.5
    max_dense_nodes: int = 5000

    def __post_init__(self):
        if self.epochs < 1:
            raise ValidationError("epochs must be >= 1")
        if self.learning_rate < 0:
            raise ValidationError("learning_rate must be >= 0")
        if min(self.hidden_dim, self.embed_dim, self.rounds) < 1:
            raise ValidationError("hidden_dim, embed_dim and rounds must be >= 1")
        if not 0.0 < self.restart_prob < 1.0:
            raise ValidationError("restart_prob must lie in (0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DetectorSpec:
    kind: str
    hyperparameters: dict
    training: TrainingConfig = field(default_factory=TrainingConfig)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KIND_HYPERPARAMETERS:
            raise ValidationError(f"unknown detector kind {self.kind!r}")
        expected = set(KIND_HYPERPARAMETERS[self.kind])
        got = set(self.hyperparameters)
        if got != expected:
            raise ValidationError(f"{self.kind} takes hyperparameters {sorted(expected)}, got {sorted(got)}")
        alpha = self.hyperparameters["alpha"]
        if not 0.0 <= alpha <= 1.0:
            raise ValidationError(f"alpha={alpha} outside [0, 1]")
        if self.kind == CONTRASTIVE and int(self.hyperparameters["K"]) < 2:
            raise ValidationError("K must be >= 2")

    def with_config(self, hyperparameters: dict, seed: int | None = None) -> DetectorSpec:
        return replace(self, hyperparameters=dict(hyperparameters), seed=self.seed if seed is None else seed)


@dataclass
class DetectorResult:
    scores: np.ndarray
    loss_history: list[float]


def finalize_scores(raw) -> np.ndarray:
    """Collapse per-round scores to one score per node and validate them.

    A 1-D input is already final and is returned as a float copy. A 2-D input
    is ``(rounds, n)`` and is averaged over rounds.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim == 2:
        raw = raw.mean(axis=0)
    elif raw.ndim != 1:
        raise ValidationError(f"scores must be 1-D or (rounds, n), got shape {raw.shape}")
    if not np.isfinite(raw).all():
        raise ValidationError("score vector contains non-finite values")
    return raw.copy()
