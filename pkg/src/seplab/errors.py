"""Exception hierarchy.

`ConfigError` subclasses map to CLI exit code 2, `NumericFailure` subclasses
to exit code 3.
"""


class SeplabError(Exception):
    pass


class ConfigError(SeplabError, ValueError):
    pass


class NumericFailure(SeplabError, ArithmeticError):
    pass


class DomainError(ConfigError):
    pass


class NonPositivePotential(ConfigError):
    pass


class SteepnessError(ConfigError):
    pass


class BelowBoundary(ConfigError):
    pass


class BasisMismatch(ConfigError):
    pass


class SignError(ConfigError):
    pass


class NotDivergent(ConfigError):
    pass


class NonmonotonicInput(ConfigError):
    pass


class ZeroLeadingCoefficient(NumericFailure):
    pass


class InconclusiveLimit(NumericFailure):
    pass


class SingularPadeSystem(NumericFailure):
    pass


class NoBracket(NumericFailure):
    pass


class SeedTooCoarse(NumericFailure):
    pass


class InsufficientTail(NumericFailure):
    pass


class StepUnderflow(NumericFailure):
    """Integrator step collapsed; `last_state` is the last accepted (phi, y)."""

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class NotInClass(ConfigError):
    """The potential is not in any class C_alpha with alpha < 1."""
