"""
blowup-lab — Error Types
Every failure raised by the library derives from BlowupLabError.
The CLI maps each family onto an ExitStatus.
"""
from enum import IntEnum
from typing import Any, Dict, Optional


class ExitStatus(IntEnum):
    OK                = 0
    VALIDATION_FAILED = 1
    CONFIG_ERROR      = 2
    NUMERIC_ERROR     = 3


class BlowupLabError(Exception):
    """Root of the blowup-lab exception tree."""

    exit_status: ExitStatus = ExitStatus.NUMERIC_ERROR


class DomainError(BlowupLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class ProbabilityConsistencyError(BlowupLabError, ArithmeticError):
    """A computed probability left [0, 1] by more than round-off."""

    def __init__(self, value: float):
        super().__init__(f"probability {value!r} outside [0, 1] beyond clamping window")
        self.value = value


class QuadratureConvergenceError(BlowupLabError, ArithmeticError):
    """Adaptive quadrature ran out of refinements before meeting abs_tol."""

    def __init__(self, best_estimate: float, error_estimate: float, refinements: int):
        super().__init__(
            f"quadrature did not converge after {refinements} refinements: "
            f"estimate={best_estimate!r} error={error_estimate!r}"
        )
        self.best_estimate  = best_estimate
        self.error_estimate = error_estimate
        self.refinements    = refinements


class NumericError(BlowupLabError, ArithmeticError):
    """A simulation produced a non-finite state."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ResourceGuardError(BlowupLabError):
    """A request would allocate an unreasonable amount of work or memory."""


class ConfigError(BlowupLabError):
    """A job configuration could not be parsed or validated."""

    exit_status = ExitStatus.CONFIG_ERROR

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line  = line
        self.field = field
