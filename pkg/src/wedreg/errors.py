class ConfigurationError(ValueError):
    """Invalid problem, grid or solver parameters."""


class DimensionError(ValueError):
    """Array shapes that do not fit the grid or the spatial domain."""


class DomainError(ValueError):
    """Evaluation point outside the admissible time range."""


class SolverError(RuntimeError):
    """A solve that cannot produce a usable trajectory."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])
