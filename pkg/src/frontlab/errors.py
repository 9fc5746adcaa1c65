"""Exception types shared across the package."""


class FrontLabError(Exception):
    pass


class ValidationError(FrontLabError, ValueError):
    pass


class DomainError(FrontLabError, ValueError):
    pass


class OracleError(FrontLabError):
    """A closed-form profile failed its own residual check."""


class NoConvergence(FrontLabError):
    pass


class GridTooNarrow(FrontLabError):
    pass


class InsufficientTail(FrontLabError):
    pass


class AmbiguousClassification(FrontLabError):
    pass


class EmptyComponent(FrontLabError):
    pass


class StabilityError(FrontLabError):
    pass


class GridMismatch(FrontLabError):
    pass


class PulledFrontError(FrontLabError):
    pass


class OverflowGuard(FrontLabError):
    pass


class DivergentEnergy(FrontLabError):
    pass


class PreconditionFailed(FrontLabError):
    pass


class InsufficientDecay(FrontLabError):
    pass


class ConfigError(FrontLabError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
