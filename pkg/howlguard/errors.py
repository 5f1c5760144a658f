class HowlguardError(Exception):
    """Base class for all errors raised by howlguard."""


class ValidationError(HowlguardError, ValueError):
    """Invalid parameters, scenario documents, grids or overrides."""


class DomainError(HowlguardError, ValueError):
    """A value outside the mathematical domain of a function."""


class UsageError(HowlguardError):
    """Command-line usage error."""
