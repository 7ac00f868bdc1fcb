class ChemofluxError(Exception):
    """Base class for all errors raised by the package."""


class QuadratureError(ChemofluxError):
    pass


class ConvergenceError(ChemofluxError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class NegativityError(ChemofluxError):
    """A time step produced a density below the roundoff allowance."""

    def __init__(self, message, min_u):
        super().__init__(message)
        self.min_u = min_u


class StepFailure(ChemofluxError):
    """The step controller could not find an admissible time step."""

    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump or {}


class ConfigError(ChemofluxError):
    """Raised for malformed or invalid run configurations."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
