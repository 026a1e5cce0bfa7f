"""Exception types shared across the package."""


class FaultMemError(Exception):
    """Base class for package-specific errors."""


class GraphConstructionError(FaultMemError):
    """Random graph construction exhausted its retry cap or the requested
    parameters admit no simple biregular graph."""


class AlistFormatError(FaultMemError):
    """Malformed or internally inconsistent alist input."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BudgetViolationError(FaultMemError):
    """A fault plan exceeds its adversarial budget."""


class AccountingError(FaultMemError):
    """A simulated cycle violated the per-cycle corrupt-count bound."""


class ConfigError(FaultMemError):
    """Invalid experiment configuration."""
