# fusion/exceptions.py
"""Error types raised by the fusion library and surfaced by the commands."""


class FusionError(Exception):
    """Base class for every error raised by the fusion package."""


class PositivityError(FusionError, ValueError):
    """An input that must be strictly positive holds a non-positive value."""

    def __init__(self, name, index, value):
        self.name = name
        self.index = tuple(int(i) for i in index)
        self.value = float(value)
        super().__init__(
            f"{name} must be strictly positive; found {self.value!r} at pixel {self.index}"
        )


class ShapeMismatchError(FusionError, ValueError):
    pass


class ImageFormatError(FusionError, OSError):
    pass


class ConvergenceError(FusionError, RuntimeError):
    """An iterative solver stopped at its cap without meeting its tolerance."""

    def __init__(self, message, iterations=None, residual=None):
        self.iterations = iterations
        self.residual = residual
        details = []
        if iterations is not None:
            details.append(f"iterations={iterations}")
        if residual is not None:
            details.append(f"residual={residual:.3e}")
        if details:
            message = f"{message} ({', '.join(details)})"
        super().__init__(message)


class BacktrackingError(ConvergenceError):
    """Lipschitz backtracking ran out of trials; ``state`` holds the solver state."""

    def __init__(self, message, state):
        self.state = state
        super().__init__(f"{message}; state: {state}", iterations=state.get("iter"))


class NumericalError(FusionError, FloatingPointError):
    """A NaN or Inf appeared in an iterate."""

    def __init__(self, field, iteration):
        self.field = field
        self.iteration = iteration
        super().__init__(f"non-finite values in {field} at iteration {iteration}")
