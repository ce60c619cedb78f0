"""Experiment configs, multi-seed runs, and the sensitivity studies."""

from .config import ExperimentConfig, SearchSettings, load_config, parse_config
from .experiment import PHASES, ExperimentResult, build_dataset, run_experiment, search_seed
from .grids import DEFAULT_GRIDS, GRANULARITY_LEVELS, named_grid
from .studies import check_nested, cross_detector_study, granularity_sweep, k_sensitivity

__all__ = [
    "DEFAULT_GRIDS",
    "ExperimentConfig",
    "ExperimentResult",
    "GRANULARITY_LEVELS",
    "PHASES",
    "SearchSettings",
    "build_dataset",
    "check_nested",
    "cross_detector_study",
    "granularity_sweep",
    "k_sensitivity",
    "load_config",
    "named_grid",
    "parse_config",
    "run_experiment",
    "search_seed",
]
