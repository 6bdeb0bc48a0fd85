"""Exception hierarchy shared by all modules.

Each class carries the CLI exit code it maps to, so the front end never
has to pattern-match on messages.
"""


class SemiquantError(Exception):
    exit_code = 3
    kind = "numeric"


class ConfigError(SemiquantError, ValueError):
    exit_code = 2
    kind = "config"


class NumericError(SemiquantError, ArithmeticError):
    exit_code = 3
    kind = "numeric"


class ConvergenceError(NumericError):
    """Refinement stopped before the requested tolerance was met."""

    def __init__(self, message, last=None, previous=None):
        if last is not None and previous is not None:
            message = f"{message} (last two estimates {previous!r}, {last!r})"
        super().__init__(message)
        self.last = last
        self.previous = previous


class NoClassicalRegionError(NumericError):
    pass


class DegenerateTurningPointError(NumericError):
    pass


class DivergentPhaseError(NumericError):
    pass


class EscapeError(NumericError):
    """Auxiliary-function ODE blew up inside the requested domain."""


class StencilError(NumericError):
    pass


class NoSuchLevelError(NumericError):
    pass


class BoundaryError(NumericError):
    """Finite-difference box is too small for the requested states."""


class InapplicableSchemeError(SemiquantError):
    exit_code = 4
    kind = "inapplicable"
