"""Exception types raised by the simulation package."""


class InvalidParameterError(ValueError):
    """A model, grid or run parameter is outside its admissible range."""


class SolverError(RuntimeError):
    """A linear solve failed (singular or non-finite system)."""


class TooExpensiveError(RuntimeError):
    """The requested time discretisation exceeds the configured step cap."""


class PathDivergedError(RuntimeError):
    """A simulated path produced a non-finite state.

    Attributes
    ----------
    step : int
        Index of the Euler step at which the state stopped being finite.
    path_index : int or None
        Index of the offending path within its run, when known.
    """

    def __init__(self, step, path_index=None):
        self.step = int(step)
        self.path_index = path_index
        where = "" if path_index is None else f" (path {path_index})"
        super().__init__(f"path diverged at step {self.step}{where}")


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
