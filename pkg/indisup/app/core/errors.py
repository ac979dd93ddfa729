"""
Exception hierarchy.

Everything raised on purpose by the library derives from IndirectSupervisionError.
Argument-shaped failures also derive from ValueError so numpy-style callers can
catch them generically.
"""


class IndirectSupervisionError(Exception):
    """Base class for all library errors."""


# ─── Physics ──────────────────────────────────────────────────────────────────

class PhysicsDomainError(IndirectSupervisionError, ValueError):
    """Sonic sample outside the validity region of the dynamic-modulus formula."""


class DegenerateError(IndirectSupervisionError, ValueError):
    """Zero slope, constant vector, or collapsed prediction."""


# ─── Linear algebra ───────────────────────────────────────────────────────────

class CollinearityError(IndirectSupervisionError, ValueError):
    """Indirect-label column is (numerically) constant, so AᵀA is singular."""


class LengthError(IndirectSupervisionError, ValueError):
    """Vector too short for the requested operation."""


class DimensionMismatchError(IndirectSupervisionError, ValueError):
    """Vector length does not match the operator."""


class NonFiniteError(IndirectSupervisionError, ValueError):
    """NaN or infinity where finite values are required."""


class ScaleError(IndirectSupervisionError, ValueError):
    """Non-positive scale passed to a rescaling."""


# ─── Model ────────────────────────────────────────────────────────────────────

class ShapeMismatchError(IndirectSupervisionError, ValueError):
    """Input tensor shape does not match the model."""


class StaleCacheError(IndirectSupervisionError):
    """Backward called with a cache that does not belong to the gradient."""


class CheckpointError(IndirectSupervisionError):
    """Checkpoint file missing, corrupt, or of an unknown format version."""


# ─── Data ─────────────────────────────────────────────────────────────────────

class WindowError(IndirectSupervisionError, ValueError):
    """Sequence length exceeds the shortest well."""


class InsufficientWellsError(IndirectSupervisionError, ValueError):
    """Not enough wells for both sides of a split."""


class NotFittedError(IndirectSupervisionError):
    """Input standardization used before it was fitted."""


class EmptyWellError(IndirectSupervisionError, ValueError):
    """A well has no valid samples."""


class TableParseError(IndirectSupervisionError, ValueError):
    """Malformed log table. Carries the 1-based file line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


# ─── Training ─────────────────────────────────────────────────────────────────

class DivergenceError(IndirectSupervisionError):
    """Loss became non-finite during training."""

    def __init__(self, iteration: int, value: float):
        self.iteration = iteration
        self.value = value
        super().__init__(f"loss became non-finite ({value}) at iteration {iteration}")


# ─── Command line ─────────────────────────────────────────────────────────────

class UsageError(IndirectSupervisionError, ValueError):
    """Invalid command-line request; reported with exit status 2."""
