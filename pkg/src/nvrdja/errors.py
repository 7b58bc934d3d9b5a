"""Exception hierarchy shared by every module."""


class NvRdjaError(Exception):
    """Base class. ``code`` is a stable machine-readable identifier."""

    code = "E_GENERIC"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class InputError(NvRdjaError, ValueError):
    code = "E_INPUT"


class InvalidStateError(InputError):
    code = "E_INVALID_STATE"


class ConfigurationError(NvRdjaError, ValueError):
    code = "E_CONFIG"


class FitError(NvRdjaError, RuntimeError):
    """Raised when the trace-distance fit does not converge.

    ``trace`` holds one ``(iteration, cost, params)`` tuple per accepted step.
    """

    code = "E_FIT_NONCONVERGENCE"

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class DslError(NvRdjaError, ValueError):
    """Parse error in the pulse/experiment DSL, located by line and column (1-based)."""

    code = "E_DSL"

    def __init__(self, message, line, column, code=None):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"{line}:{column}: {message}", code)
