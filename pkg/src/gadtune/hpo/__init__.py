from .gp import GaussianProcess, SurrogateError, expected_improvement
from .search import (
    ScoreCache,
    SearchResult,
    grid_search,
    make_trial_runner,
    select_best,
    smbo_search,
)
from .space import Configuration, Dimension, HyperparameterSpace, TrialRecord, TrialStatus

__all__ = [
    "Configuration",
    "Dimension",
    "GaussianProcess",
    "HyperparameterSpace",
    "ScoreCache",
    "SearchResult",
    "SurrogateError",
    "TrialRecord",
    "TrialStatus",
    "expected_improvement",
    "grid_search",
    "make_trial_runner",
    "select_best",
    "smbo_search",
]
