"""Label-free hyperparameter selection for self-supervised graph anomaly detectors."""

__version__ = "0.1.0"
