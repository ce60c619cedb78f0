"""Declarative experiment configuration (TOML) and its validation.

A config names a dataset (files, or a synthetic graph plus an injection
plan), one detector, a search grid, a search mode and the seeds to run::

    name = "reference"
    output_dir = "runs/reference"
    seeds = [0, 1, 2, 3, 4]

    [dataset.synthetic]
    n = 500
    d = 32
    communities = 5
    intra_p = 0.05
    inter_p = 0.002
    seed = 1

    [dataset.injection]
    ratio = 0.05
    clique_size = 10
    seed = 2

    [detector]
    kind = "contrastive_egonet"

    [detector.training]
    epochs = 100

    [search]
    mode = "grid"           # or "smbo"
    variant = "improved"    # or "original"
    ratio = 0.05            # assumed anomaly ratio, gives k
    grid = "default"        # or a [search.space] table of value lists

Relative paths are resolved against the config file's directory.
"""

from __future__ import annotations

import copy
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..detectors import KIND_HYPERPARAMETERS, TrainingConfig
from ..errors import ConfigError, ValidationError
from ..hpo import HyperparameterSpace
from ..injection import InjectionPlan
from ..internal_eval import IMPROVED, ORIGINAL
from .grids import named_grid

SEARCH_MODES = ("grid", "smbo")

_TOP_KEYS = {"name", "output_dir", "seeds", "dataset", "detector", "search"}
_SYNTH_KEYS = {"n", "d", "communities", "intra_p", "inter_p", "seed", "mean_scale", "noise_std"}
_INJECT_KEYS = {"ratio", "clique_size", "clique_count", "contextual_count", "candidate_pool", "seed"}
_FILE_KEYS = {"edges", "attributes", "labels", "id_map"}
_SEARCH_KEYS = {
    "mode", "variant", "ratio", "grid", "space", "init_j", "budget", "pool_size",
    "underfit_window", "underfit_tol", "time_budget",
}


@dataclass
class SearchSettings:
    mode: str = "grid"
    variant: str = IMPROVED
    ratio: float = 0.05
    grid_label: str = "custom"
    space: HyperparameterSpace = None
    init_j: int = 5
    budget: int = 15
    pool_size: int = 64
    underfit_window: int = 400
    underfit_tol: float = 1e-2
    time_budget: float | None = None


@dataclass
class ExperimentConfig:
    name: str
    kind: str
    training: TrainingConfig
    search: SearchSettings
    seeds: list
    output_dir: Path
    synthetic: dict | None = None
    injection: InjectionPlan | None = None
    files: dict | None = None
    raw: dict = field(default_factory=dict, repr=False)

    def with_search(self, **changes) -> ExperimentConfig:
        """Copy with some search settings replaced (used by the sweep studies)."""
        out = copy.copy(self)
        out.search = copy.copy(self.search)
        for key, value in changes.items():
            setattr(out.search, key, value)
        return out

    def echo(self) -> dict:
        """JSON-friendly description of the resolved config."""
        return {
            "name": self.name,
            "detector": self.kind,
            "training": self.training.to_dict(),
            "search": {
                "mode": self.search.mode,
                "variant": self.search.variant,
                "ratio": self.search.ratio,
                "grid": self.search.grid_label,
                "space": self.search.space.to_dict(),
                "init_j": self.search.init_j,
                "budget": self.search.budget,
                "pool_size": self.search.pool_size,
                "underfit_window": self.search.underfit_window,
                "underfit_tol": self.search.underfit_tol,
                "time_budget": self.search.time_budget,
            },
            "seeds": list(self.seeds),
            "dataset": {
                "synthetic": self.synthetic,
                "injection": None if self.injection is None else vars(self.injection).copy(),
                "files": None if self.files is None else {k: str(v) for k, v in self.files.items()},
            },
        }


def _unknown(section, got, allowed):
    extra = sorted(set(got) - allowed)
    if extra:
        raise ConfigError(f"[{section}] has unknown keys: {', '.join(extra)}")


def _table(data, key, section):
    value = data.get(key, {})
    if not isinstance(value, dict):
        raise ConfigError(f"[{section}] must be a table")
    return value


def parse_config(data: dict, base_dir=".") -> ExperimentConfig:
    """Validate a parsed TOML document; every problem raises :class:`ConfigError`."""
    base_dir = Path(base_dir)
    _unknown("top level", data, _TOP_KEYS)
    try:
        return _parse(data, base_dir)
    except ConfigError:
        raise
    except (ValidationError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _parse(data, base_dir):
    name = str(data.get("name", "experiment"))
    seeds = data.get("seeds", [0])
    if not isinstance(seeds, list) or not seeds or not all(isinstance(s, int) for s in seeds):
        raise ConfigError("seeds must be a non-empty list of integers")
    if len(set(seeds)) != len(seeds):
        raise ConfigError("seeds must be distinct")
    output_dir = base_dir / data.get("output_dir", f"runs/{name}")

    detector = _table(data, "detector", "detector")
    _unknown("detector", detector, {"kind", "training"})
    kind = detector.get("kind")
    if kind not in KIND_HYPERPARAMETERS:
        raise ConfigError(f"detector.kind must be one of {sorted(KIND_HYPERPARAMETERS)}, got {kind!r}")
    training = TrainingConfig(**_table(detector, "training", "detector.training"))

    dataset = _table(data, "dataset", "dataset")
    _unknown("dataset", dataset, {"synthetic", "injection"} | _FILE_KEYS)
    synthetic = injection = files = None
    if "synthetic" in dataset:
        if set(dataset) & _FILE_KEYS:
            raise ConfigError("dataset: give either files or [dataset.synthetic], not both")
        synthetic = dict(_table(dataset, "synthetic", "dataset.synthetic"))
        _unknown("dataset.synthetic", synthetic, _SYNTH_KEYS)
        missing = {"n", "d", "communities", "intra_p", "inter_p"} - set(synthetic)
        if missing:
            raise ConfigError(f"[dataset.synthetic] is missing {', '.join(sorted(missing))}")
        synthetic.setdefault("seed", 0)
        if "injection" not in dataset:
            raise ConfigError("a synthetic dataset needs [dataset.injection] to carry labels")
        injection = _injection_plan(_table(dataset, "injection", "dataset.injection"), synthetic["n"])
    else:
        if "injection" in dataset:
            raise ConfigError("[dataset.injection] applies to synthetic datasets only")
        if not {"edges", "attributes", "labels"} <= set(dataset):
            raise ConfigError("file datasets need edges, attributes and labels paths")
        files = {k: base_dir / dataset[k] for k in _FILE_KEYS if k in dataset}

    search = _search_settings(_table(data, "search", "search"), kind)
    if search.mode == "smbo" and search.budget > search.space.size:
        raise ConfigError(f"search.budget={search.budget} exceeds the {search.space.size}-point grid")
    return ExperimentConfig(
        name=name, kind=kind, training=training, search=search, seeds=list(seeds),
        output_dir=output_dir, synthetic=synthetic, injection=injection, files=files, raw=data,
    )


def _injection_plan(section, n):
    _unknown("dataset.injection", section, _INJECT_KEYS)
    section = dict(section)
    if "ratio" in section:
        if "clique_count" in section or "contextual_count" in section:
            raise ConfigError("[dataset.injection]: give ratio or explicit counts, not both")
        ratio = section.pop("ratio")
        if not 0.0 < ratio < 0.5:
            raise ConfigError("dataset.injection.ratio must lie in (0, 0.5)")
        return InjectionPlan.for_ratio(n, ratio, **section)
    return InjectionPlan(**section)


def _search_settings(section, kind):
    _unknown("search", section, _SEARCH_KEYS)
    s = SearchSettings()
    for key in ("mode", "variant", "ratio", "init_j", "budget", "pool_size", "underfit_window",
                "underfit_tol", "time_budget"):
        if key in section:
            setattr(s, key, section[key])
    if s.mode not in SEARCH_MODES:
        raise ConfigError(f"search.mode must be one of {SEARCH_MODES}, got {s.mode!r}")
    if s.variant not in (ORIGINAL, IMPROVED):
        raise ConfigError(f"search.variant must be {ORIGINAL!r} or {IMPROVED!r}, got {s.variant!r}")
    if not isinstance(s.ratio, (int, float)) or not 0.0 < s.ratio < 0.5:
        raise ConfigError("search.ratio must lie in (0, 0.5)")
    if "space" in section and "grid" in section:
        raise ConfigError("search: give either grid or a [search.space] table, not both")
    if "space" in section:
        grid = _table(section, "space", "search.space")
        s.grid_label = "custom"
    else:
        s.grid_label = section.get("grid", "default")
        try:
            grid = named_grid(s.grid_label, kind)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
    if set(grid) != set(KIND_HYPERPARAMETERS[kind]):
        raise ConfigError(f"{kind} searches {list(KIND_HYPERPARAMETERS[kind])}, grid names {sorted(grid)}")
    for dim, values in grid.items():
        if not isinstance(values, list) or not values:
            raise ConfigError(f"grid for {dim!r} must be a non-empty list")
    s.space = HyperparameterSpace.from_dict({d: grid[d] for d in KIND_HYPERPARAMETERS[kind]})
    if s.mode == "smbo" and s.init_j < 2:
        raise ConfigError("search.init_j must be >= 2")
    if s.mode == "smbo" and s.budget < s.init_j:
        raise ConfigError("search.budget must be >= search.init_j")
    return s


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(data, path.parent)
