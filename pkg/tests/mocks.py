"""Cheap stand-ins for detector-backed trial runners."""

import math

import numpy as np

from gadtune.hpo import HyperparameterSpace, TrialRecord, TrialStatus

ANEMONE_ALPHAS = [0.0, 0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99, 1.0]


def anemone_space():
    return HyperparameterSpace.from_dict({"alpha": ANEMONE_ALPHAS, "K": [2, 3, 4, 5]})


def runner(objective, calls=None):
    """Trial runner whose T is ``objective(config)``; ``None`` means a failed trial."""

    def run_trial(config, seed):
        if calls is not None:
            calls.append(config)
        t = objective(config)
        if t is None:
            return TrialRecord(config, seed, None, None, TrialStatus.FAILED_NAN, message="mock failure")
        return TrialRecord(config, seed, np.zeros(1), float(t))

    return run_trial


def unimodal(peak_alpha=0.35, peak_k=4):
    """Positive single-peaked objective over (alpha, K)."""

    def f(config):
        a, k = config["alpha"], config["K"]
        return 10.0 * math.exp(-((a - peak_alpha) ** 2) / 0.08 - (k - peak_k) ** 2 / 3.0)

    return f
