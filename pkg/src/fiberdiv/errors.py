"""Exception types raised across the package."""


class FiberdivError(Exception):
    """Base class for all package errors."""


class DomainError(FiberdivError, ArithmeticError):
    """An interval operation was applied outside its domain."""


class ExprSyntaxError(FiberdivError, ValueError):
    """Malformed expression text. ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} (at offset {offset})")


class ArityError(FiberdivError, ValueError):
    """An expression references a variable beyond the declared dimension."""


class EvalError(FiberdivError, ArithmeticError):
    """Pointwise evaluation hit a domain violation or produced NaN."""


class NonPositiveResolution(FiberdivError, ValueError):
    pass


class ResourceLimit(FiberdivError, RuntimeError):
    """The voxel/cell budget of a run would be exceeded."""


class InsufficientLevels(FiberdivError, ValueError):
    pass


class ZeroCount(FiberdivError, ValueError):
    pass


class SampleOutsideRoot(FiberdivError, ValueError):
    pass


class MismatchedRuns(FiberdivError, ValueError):
    pass


class UnsupportedDimension(FiberdivError, ValueError):
    pass


class InvariantViolation(FiberdivError, AssertionError):
    """An internal consistency check failed."""


class DomainClampWarning(RuntimeWarning):
    """An enclosure was clipped to the domain of a partial function (e.g. sqrt)."""
