"""Self-supervised graph anomaly detectors with searchable trade-off weights."""

from .base import (
    CONTRASTIVE,
    GENERATIVE,
    KIND_HYPERPARAMETERS,
    DetectorResult,
    DetectorSpec,
    TrainingConfig,
    finalize_scores,
)
from .contrastive import train_contrastive
from .generative import train_generative

_TRAINERS = {GENERATIVE: train_generative, CONTRASTIVE: train_contrastive}


def run_detector(g, spec: DetectorSpec) -> DetectorResult:
    """Train the detector named by ``spec.kind`` on ``g`` and return its scores."""
    return _TRAINERS[spec.kind](g, spec)


__all__ = [
    "CONTRASTIVE",
    "GENERATIVE",
    "KIND_HYPERPARAMETERS",
    "DetectorResult",
    "DetectorSpec",
    "TrainingConfig",
    "finalize_scores",
    "run_detector",
    "train_contrastive",
    "train_generative",
]
