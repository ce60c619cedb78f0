"""Discrete hyperparameter spaces, configurations, and trial records."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import ValidationError


@dataclass(frozen=True)
class Dimension:
    name: str
    kind: str  # "real" or "integer"
    values: tuple

    def __post_init__(self):
        if self.kind not in ("real", "integer"):
            raise ValidationError(f"dimension {self.name!r}: kind must be 'real' or 'integer'")
        if not self.values:
            raise ValidationError(f"dimension {self.name!r} has no values")
        cast = int if self.kind == "integer" else float
        vals = tuple(cast(v) for v in self.values)
        if self.kind == "integer" and any(v != orig for v, orig in zip(vals, self.values)):
            raise ValidationError(f"dimension {self.name!r}: non-integer value")
        if list(vals) != sorted(set(vals)):
            raise ValidationError(f"dimension {self.name!r}: values must be sorted and distinct")
        object.__setattr__(self, "values", vals)

    def scale(self, value) -> float:
        """Min-max position of ``value`` in [0, 1]; 0 for single-valued dimensions."""
        lo, hi = self.values[0], self.values[-1]
        return 0.0 if hi == lo else (float(value) - lo) / (hi - lo)


@dataclass(frozen=True, order=True)
class Configuration:
    """One value per dimension, ordered like the owning space.

    Configurations compare lexicographically by their values, which is the
    tie-break order used by the searchers.
    """

    values: tuple
    names: tuple = field(compare=False)

    def __getitem__(self, name):
        return self.values[self.names.index(name)]

    def as_dict(self) -> dict:
        return dict(zip(self.names, self.values))

    def label(self) -> str:
        return ";".join(f"{k}={_fmt(v)}" for k, v in zip(self.names, self.values))

    def __repr__(self):
        return f"Configuration({self.label()})"


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


class HyperparameterSpace:
    """Cartesian product of discrete value lists, in declaration order."""

    def __init__(self, dimensions):
        dims = [d if isinstance(d, Dimension) else Dimension(*d) for d in dimensions]
        if not dims:
            raise ValidationError("a space needs at least one dimension")
        names = [d.name for d in dims]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate dimension names")
        self.dimensions = tuple(dims)
        self.names = tuple(names)

    @classmethod
    def from_dict(cls, grid: dict) -> HyperparameterSpace:
        """Build from ``{name: values}``; all-integer value lists become integer dimensions."""
        dims = []
        for name, values in grid.items():
            values = list(values)
            is_int = all(isinstance(v, (int, np.integer)) and not isinstance(v, bool) for v in values)
            dims.append(Dimension(name, "integer" if is_int else "real", tuple(values)))
        return cls(dims)

    def to_dict(self) -> dict:
        return {d.name: list(d.values) for d in self.dimensions}

    @property
    def size(self) -> int:
        return math.prod(len(d.values) for d in self.dimensions)

    def __len__(self):
        return self.size

    def __iter__(self):
        for combo in itertools.product(*(d.values for d in self.dimensions)):
            yield Configuration(combo, self.names)

    def __contains__(self, config: Configuration) -> bool:
        return config.names == self.names and all(
            v in d.values for v, d in zip(config.values, self.dimensions)
        )

    def make(self, **values) -> Configuration:
        cfg = Configuration(tuple(values[n] for n in self.names), self.names)
        if cfg not in self:
            raise ValidationError(f"{cfg} is not in the space")
        return cfg

    def configurations(self) -> list[Configuration]:
        return list(self)

    def scaled(self, config: Configuration) -> np.ndarray:
        return np.array([d.scale(v) for d, v in zip(self.dimensions, config.values)])

    def is_subset_of(self, other: HyperparameterSpace) -> bool:
        if self.names != other.names:
            return False
        return all(set(a.values) <= set(b.values) for a, b in zip(self.dimensions, other.dimensions))


class TrialStatus(str, Enum):
    OK = "ok"
    FAILED_NAN = "failed_nan"
    FAILED_OOM = "failed_oom"
    FAILED_OOR = "failed_oor"
    FAILED_UNDERFIT = "failed_underfit"


@dataclass
class TrialRecord:
    config: Configuration
    seed: int
    scores: np.ndarray | None
    t_value: float | None
    status: TrialStatus = TrialStatus.OK
    auc: float | None = None
    message: str = ""
    csm: object = None  # CsmReport when available

    def __post_init__(self):
        if (self.status == TrialStatus.OK) != (self.t_value is not None):
            raise ValidationError("t_value must be present exactly when status is ok")

    @property
    def ok(self) -> bool:
        return self.status == TrialStatus.OK
