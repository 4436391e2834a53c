"""Exception hierarchy shared by all gibrat modules."""


class GibratError(Exception):
    """Base class for library errors."""


class DomainError(GibratError, ValueError):
    """A parameter lies outside the domain where the model is defined."""


class ConfigError(GibratError, ValueError):
    """A configuration record is malformed or inconsistent."""


class NumericalError(GibratError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance.

    ``diagnostics`` carries whatever the failing routine could report
    (typically the last two iterates of a refinement loop).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ResourceError(GibratError, RuntimeError):
    """A computation would exceed a configured resource cap."""
