"""Built-in search grids for the two detector kinds."""

from __future__ import annotations

from ..detectors import CONTRASTIVE, GENERATIVE

_COARSE_ALPHA = [0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99, 1.0]

# trade-off grids searched per detector kind
DEFAULT_GRIDS = {
    GENERATIVE: {"alpha": list(_COARSE_ALPHA)},
    CONTRASTIVE: {"alpha": [0.0] + _COARSE_ALPHA, "K": [2, 3, 4, 5]},
}

_FINE_ALPHA = [0.0, 0.01] + [round(0.05 * i, 2) for i in range(1, 20)] + [0.99, 1.0]
_FINEST_ALPHA = [0.0, 0.01] + [round(0.025 * i, 3) for i in range(1, 40)] + [0.99, 1.0]

# nested contrastive grids, coarsest first
GRANULARITY_LEVELS = {
    "level1": {"alpha": [0.0, 0.2, 0.4, 0.6, 0.8, 1.0], "K": [2, 4]},
    "level2": DEFAULT_GRIDS[CONTRASTIVE],
    "level3": {"alpha": _FINE_ALPHA, "K": [2, 3, 4, 5]},
    "level4": {"alpha": _FINEST_ALPHA, "K": [2, 3, 4, 5, 6, 7]},
}


def named_grid(name: str, kind: str) -> dict:
    """Resolve ``"default"`` or ``"level1"``..``"level4"`` to a value-list dict."""
    if name == "default":
        return {k: list(v) for k, v in DEFAULT_GRIDS[kind].items()}
    if name in GRANULARITY_LEVELS:
        if kind != CONTRASTIVE:
            raise KeyError(f"granularity grid {name!r} is defined for {CONTRASTIVE} only")
        return {k: list(v) for k, v in GRANULARITY_LEVELS[name].items()}
    raise KeyError(f"unknown grid {name!r}")
