"""Exception types shared across the package."""


class BlenderForgeError(Exception):
    """Base class for all package errors."""


class ChartMismatchError(BlenderForgeError):
    """A map was applied to, or composed with, data living in the wrong chart."""


class DimensionMismatchError(BlenderForgeError):
    """Vector or matrix dimensions do not agree with the model's splitting."""


class SingularBlockError(BlenderForgeError):
    """A block of an affine map is not invertible."""


class DomainEscapeError(BlenderForgeError):
    """An orbit left the domain box of the map about to be applied.

    Carries the step index and the name of the offending box.
    """

    def __init__(self, step: int, box_name: str, message: str = ""):
        self.step = step
        self.box_name = box_name
        super().__init__(
            message or f"orbit escaped box {box_name!r} at step {step}"
        )


class ModelInvariantError(BlenderForgeError):
    """A structural invariant of the cycle model is violated."""


class NoSolutionError(BlenderForgeError):
    """A search exhausted its budget without finding an admissible solution.

    ``best_residual`` records the smallest residual encountered, so callers
    can report how close the search came.
    """

    def __init__(self, message: str, best_residual: float = float("inf")):
        self.best_residual = best_residual
        super().__init__(message)


class ConvergenceError(BlenderForgeError):
    """An iterative certification did not reach its tolerance in the budget."""

    def __init__(self, message: str, achieved: float = float("inf")):
        self.achieved = achieved
        super().__init__(message)


class ConfigError(BlenderForgeError):
    """A run configuration document is malformed or inconsistent."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
