"""Exception hierarchy shared by every crowdwise module."""


class CrowdwiseError(Exception):
    """Base class for all library errors."""


class ValidationError(CrowdwiseError, ValueError):
    """An input violates a structural precondition of the model."""


class TooSmall(ValidationError):
    pass


class NotStochastic(ValidationError):
    pass


class NotStronglyConnected(ValidationError):
    pass


class NotAperiodic(ValidationError):
    pass


class SolverFailure(CrowdwiseError, ArithmeticError):
    """A linear solve broke down or missed its residual contract."""


class StubbornPresent(CrowdwiseError, ValueError):
    """The requested quantity only exists when no (other) agent is stubborn."""


class DiagnosticViolation(CrowdwiseError, AssertionError):
    """A learning-dynamics invariant failed on a recorded trajectory."""

    def __init__(self, check, step, message):
        super().__init__(f"{check} violated at t={step}: {message}")
        self.check = check
        self.step = step


class ConfigError(CrowdwiseError, ValueError):
    """Malformed experiment configuration; ``path`` locates the bad field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
