"""Exception hierarchy shared across the package."""


class ValidationError(ValueError):
    """An argument or input violates a documented precondition."""


class GraphParseError(ValidationError):
    """A graph input file is malformed."""

    def __init__(self, path, lineno, message):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


class ShapeError(ValidationError):
    """Array shapes are inconsistent."""


class CapacityError(ValidationError):
    """Not enough nodes to satisfy a disjoint selection."""


class TrainingError(RuntimeError):
    """Detector training produced non-finite values."""


class ResourceLimitError(RuntimeError):
    """A trial exceeded a configured size ceiling (out-of-memory analogue)."""


class SearchError(RuntimeError):
    """Every trial of a search failed."""


class ConfigError(ValueError):
    """An experiment configuration file is invalid."""
