"""Exception taxonomy shared across the package.

The CLI maps these onto its exit codes: ConfigError -> 2,
InfeasibleStartError -> 3, EmptyFrontError -> 4, NumericalAbort and
CFLViolation -> 5.
"""


class AstroreachError(Exception):
    """Base class for package errors."""


class ConfigError(AstroreachError):
    """Invalid or incomplete scenario configuration."""


class FieldFormatError(AstroreachError):
    """Malformed value-field file."""

    def __init__(self, message: str, byte_offset: int | None = None):
        if byte_offset is not None:
            message = f"{message} (at byte offset {byte_offset})"
        super().__init__(message)
        self.byte_offset = byte_offset


class CFLViolation(AstroreachError):
    """Requested time step exceeds the stability bound."""


class NumericalAbort(AstroreachError):
    """Non-finite values appeared during the PDE march."""

    def __init__(self, message: str, horizon: float):
        super().__init__(f"{message} (horizon t = {horizon:.6g})")
        self.horizon = horizon


class InfeasibleStartError(AstroreachError):
    """Trajectory reconstruction requested from an infeasible start."""


class EmptyFrontError(AstroreachError):
    """A Pareto scan found no feasible candidate."""


class OutOfHullError(AstroreachError):
    """Strict-mode interpolation query outside the grid hull."""
