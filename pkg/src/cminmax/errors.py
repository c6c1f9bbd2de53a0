"""Exception hierarchy shared by every module."""


class CMinMaxError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(CMinMaxError, ValueError):
    pass


class EmptyCloudError(CMinMaxError, ValueError):
    pass


class ConfigError(CMinMaxError, ValueError):
    pass


class NotConvexVertexError(CMinMaxError, ValueError):
    """Edge directions do not fit in an open half-space."""


class NoCornersError(CMinMaxError, RuntimeError):
    """The schedule finished without a single unambiguous extreme."""


class BudgetExceededError(CMinMaxError, RuntimeError):
    pass


class ParseError(CMinMaxError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FormatError(CMinMaxError, ValueError):
    pass


class IoError(CMinMaxError, OSError):
    pass
