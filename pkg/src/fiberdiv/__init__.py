"""Orthree approximation of implicitly defined fibers.

Given ``f: R^n -> R^m`` (as expression text) and a target ``y``, the fiber
``f^{-1}(y)`` is covered by dyadic voxels obtained by repeatedly bisecting a
root box and keeping only voxels whose closure may meet the fiber, decided by
an outward-rounded interval enclosure.  The package also provides the
dense-grid baseline and the measurements that compare the two.
"""

from .analysis import build_report, coverage_check, estimate_measure, fit_dimension
from .densegrid import DenseResult, dense_scan
from .errors import (
    ArityError,
    DomainError,
    EvalError,
    ExprSyntaxError,
    FiberdivError,
    InsufficientLevels,
    MismatchedRuns,
    NonPositiveResolution,
    ResourceLimit,
    SampleOutsideRoot,
    UnsupportedDimension,
    ZeroCount,
)
from .expr import eval_interval, eval_interval_batch, eval_point, parse
from .geometry import Box, DyadicVoxel, FiberSpec, bounds, children, diameter, required_depth
from .interval import Interval, interval_binary, interval_contains, interval_unary
from .subdivide import (
    LevelStats,
    Predicate,
    PredicateDecision,
    SubdivisionResult,
    interval_predicate,
    measure_sequence,
    oracle_predicate,
    subdivide,
)

__version__ = "0.1.0"
