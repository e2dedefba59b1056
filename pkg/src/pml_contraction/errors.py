"""Exception hierarchy.

Validation problems subclass ``ValueError`` so callers that only care about
bad input can catch that; the CLI maps them to exit code 2.
"""


class PMLError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(PMLError, ValueError):
    pass


class RowSumError(ValidationError):
    pass


class NegativeEntryError(ValidationError):
    pass


class DeadColumnError(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class SupportError(ValidationError):
    pass


class DeadOutcomeError(ValidationError):
    pass


class GeneratorError(ValidationError):
    pass


class SearchConfigError(ValidationError):
    pass


class SizeError(ValidationError):
    pass


class RegimeError(ValidationError):
    pass


class InfeasibleQ(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class SaturationError(PMLError):
    """The divergence budget is zero, so no sample size reaches the target."""


class ExhaustedError(PMLError):
    pass


class SoundnessAlarm(PMLError):
    """An empirical quantity exceeded the analytic bound that should cap it."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness or {}
