"""Empirical checks of the subdivision's complexity behaviour.

The box-counting measure of level ``t`` is ``|Q_t| * delta0**d * 2**(-t*d)``
and the growth of ``log2 |Q_t|`` against ``t`` estimates the dimension ``d``
of the fiber.  Box covers overestimate the Hausdorff measure by a bounded
shape factor, so :func:`estimate_measure` reports a surrogate, not ``H^d``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .densegrid import DenseResult
from .errors import (
    InsufficientLevels,
    InvariantViolation,
    MismatchedRuns,
    SampleOutsideRoot,
    ZeroCount,
)
from .geometry import cell_bounds
from .subdivide import LevelStats, SubdivisionResult

MEASURE_CAVEAT = (
    "box-counting surrogate: axis-aligned dyadic covers overestimate the "
    "Hausdorff measure by a bounded shape factor"
)
DEFAULT_FIT_LEVELS = 5
MIN_FIT_COUNT = 8


@dataclass(frozen=True)
class DimensionFit:
    slope: float
    intercept: float
    r_squared: float
    fit_range: tuple[int, int]


def _fit_levels(levels, fit_range, n_levels, min_count):
    if fit_range is not None:
        t_min, t_max = fit_range
        chosen = [s for s in levels if t_min <= s.t <= t_max]
        if any(s.count == 0 for s in chosen):
            raise ZeroCount(f"zero voxel count inside fit range {fit_range}")
    else:
        usable = [s for s in levels if s.count >= min_count]
        chosen = usable[-n_levels:]
    if len(chosen) < 3 or chosen[-1].t - chosen[0].t < 2:
        raise InsufficientLevels(f"need at least 3 levels to fit, have {len(chosen)}")
    return chosen


def fit_dimension(
    levels: Sequence[LevelStats],
    fit_range: Optional[tuple[int, int]] = None,
    *,
    n_levels: int = DEFAULT_FIT_LEVELS,
    min_count: int = MIN_FIT_COUNT,
) -> DimensionFit:
    """Least-squares slope of ``log2 |Q_t|`` against ``t``.

    Without ``fit_range`` the deepest ``n_levels`` levels holding at least
    ``min_count`` voxels are used.
    """
    chosen = _fit_levels(levels, fit_range, n_levels, min_count)
    t = np.array([s.t for s in chosen], dtype=np.float64)
    y = np.array([math.log2(s.count) for s in chosen])
    tc = t - t.mean()
    yc = y - y.mean()
    slope = float((tc * yc).sum() / (tc * tc).sum())
    intercept = float(y.mean() - slope * t.mean())
    ss_res = float(((yc - slope * tc) ** 2).sum())
    ss_tot = float((yc * yc).sum())
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res == 0.0 else 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return DimensionFit(slope, intercept, r2, (chosen[0].t, chosen[-1].t))


@dataclass(frozen=True)
class MeasureEstimate:
    sequence: list[float]
    final: float
    plateau_ratio: float
    d: float
    caveat: str = MEASURE_CAVEAT


def box_counting_measure(count: int, t: int, d: float, delta0: float) -> float:
    return count * delta0**d * 2.0 ** (-t * d)


def estimate_measure(levels: Sequence[LevelStats], d: float, delta0: float, window: int = 3) -> MeasureEstimate:
    """Measure sequence, its last value, and the spread of the last ``window`` ratios."""
    if d < 0:
        raise ValueError("d must be >= 0")
    if any(s.count == 0 for s in levels):
        raise ZeroCount("box-counting measure needs nonzero counts at every level")
    if len(levels) < window + 1:
        raise InsufficientLevels(f"plateau ratio needs {window + 1} levels, have {len(levels)}")
    seq = [box_counting_measure(s.count, s.t, d, delta0) for s in levels]
    tail = seq[-(window + 1):]
    plateau = max(abs(b / a - 1.0) for a, b in zip(tail, tail[1:]))
    return MeasureEstimate(seq, seq[-1], plateau, d)


# ---------------------------------------------------------------------------
# coverage
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LevelCoverage:
    t: int
    covered: int
    missed: list[int]
    max_center_distance: float
    half_diameter: float


@dataclass(frozen=True)
class CoverageReport:
    levels: list[LevelCoverage]
    passed: bool
    off_fiber_missed: int = 0
    diagnosis: str = ""

    @property
    def total_misses(self) -> int:
        return sum(len(lc.missed) for lc in self.levels)


def _linear_ids(index: np.ndarray, t: int) -> np.ndarray:
    ids = np.zeros(len(index), dtype=np.int64)
    for axis in range(index.shape[1]):
        ids = (ids << t) | index[:, axis]
    return ids


def _level_coverage(result, t, points):
    root = result.root
    n = root.n
    members = result.level_indices[t]
    side = 1 << t
    rlo = np.asarray(root.lo)
    w = (np.asarray(root.hi) - rlo) * 2.0**-t
    base = np.floor((points - rlo) / w).astype(np.int64)
    covered = np.zeros(len(points), dtype=bool)
    best = np.full(len(points), np.inf)
    use_ids = t * n <= 62
    if use_ids:
        member_ids = _linear_ids(members, t)
    else:
        member_set = {tuple(row) for row in members.tolist()}
    for off in itertools.product((-1, 0, 1), repeat=n):
        cand = base + np.asarray(off, dtype=np.int64)
        valid = np.all((cand >= 0) & (cand < side), axis=1)
        cand = np.clip(cand, 0, side - 1)
        lo, hi = cell_bounds(root, t, cand)
        inside = valid & np.all((lo <= points) & (points <= hi), axis=1)
        if use_ids:
            member = np.isin(_linear_ids(cand, t), member_ids)
        else:
            member = np.fromiter((tuple(r) in member_set for r in cand.tolist()), dtype=bool, count=len(cand))
        hit = inside & member
        covered |= hit
        dist = np.linalg.norm(points - 0.5 * (lo + hi), axis=1)
        best = np.where(hit, np.minimum(best, dist), best)
    return covered, best


def coverage_check(
    result: SubdivisionResult,
    samples,
    off_fiber: Optional[Sequence[bool]] = None,
) -> CoverageReport:
    """Check that every on-fiber sample lies in the closure of a kept voxel at every level.

    ``off_fiber`` marks samples known not to lie on the fiber; their misses
    are counted separately and do not fail the check.
    """
    points = np.asarray(samples, dtype=np.float64)
    if points.ndim != 2 or len(points) == 0:
        raise ValueError("samples must be a nonempty (k, n) array")
    if points.shape[1] != result.n:
        raise ValueError(f"samples have {points.shape[1]} coordinates, root has {result.n}")
    rlo, rhi = np.asarray(result.root.lo), np.asarray(result.root.hi)
    outside = ~np.all((rlo <= points) & (points <= rhi), axis=1)
    if outside.any():
        first = int(np.argmax(outside))
        raise SampleOutsideRoot(f"sample {first} {points[first].tolist()} lies outside the root box")
    off = np.zeros(len(points), dtype=bool) if off_fiber is None else np.asarray(off_fiber, dtype=bool)
    on = ~off

    per_level = []
    off_missed = 0
    for s in result.levels:
        covered, best = _level_coverage(result, s.t, points)
        missed = np.flatnonzero(on & ~covered)
        off_missed += int((off & ~covered).sum())
        dist = best[on & covered]
        per_level.append(
            LevelCoverage(
                t=s.t,
                covered=int((on & covered).sum()),
                missed=missed.tolist(),
                max_center_distance=float(dist.max()) if len(dist) else 0.0,
                half_diameter=result.delta0 * 2.0 ** (-s.t - 1),
            )
        )
    misses = sum(len(lc.missed) for lc in per_level)
    diagnosis = ""
    if result.root_excluded and on.any():
        diagnosis = "root voxel was excluded by the predicate, yet on-fiber samples were supplied"
    elif misses:
        worst = next(lc for lc in per_level if lc.missed)
        diagnosis = f"{misses} sample/level misses; first at depth {worst.t}, sample {worst.missed[0]}"
    return CoverageReport(per_level, misses == 0 and not diagnosis, off_missed, diagnosis)


# ---------------------------------------------------------------------------
# complexity report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComplexityReport:
    n: int
    m: Optional[int]
    delta0: float
    delta: float
    depth: int
    d: float
    rows: list[dict]
    subdivision_evals: int
    subdivision_seconds: float
    leaves: int
    alpha: float
    fit: Optional[DimensionFit]
    measure: Optional[MeasureEstimate]
    output_size_constant: float
    work_constant: float
    dense: Optional[dict] = None
    eval_ratio: Optional[float] = None
    leaf_ratio: Optional[float] = None
    root_excluded: bool = False
    notes: list[str] = field(default_factory=list)


def expected_subdivision_evals(counts: Sequence[int], n: int) -> int:
    """``1 + sum_{t>=1} 2**n * |Q_{t-1}|``."""
    return 1 + sum((1 << n) * c for c in counts[:-1])


def build_report(
    sub: SubdivisionResult,
    dense: Optional[DenseResult] = None,
    d: Optional[float] = None,
    *,
    fit_levels: int = DEFAULT_FIT_LEVELS,
) -> ComplexityReport:
    """Assemble per-level statistics, totals, fits and the dense comparison."""
    if dense is not None and (dense.root != sub.root or dense.depth != sub.depth):
        raise MismatchedRuns(
            f"subdivision (depth {sub.depth}, root {sub.root}) vs dense (depth {dense.depth}, root {dense.root})"
        )
    notes = []
    fit = None
    try:
        fit = fit_dimension(sub.levels, n_levels=fit_levels)
    except InsufficientLevels:
        # shallow run: fall back to every nonempty level
        try:
            fit = fit_dimension(sub.levels, n_levels=fit_levels, min_count=1)
            notes.append("dimension fit includes levels with fewer than 8 voxels")
        except (InsufficientLevels, ZeroCount) as exc:
            notes.append(f"no dimension fit: {exc}")
    if d is None:
        d = float(round(fit.slope)) if fit is not None else float(sub.n)
    measure = None
    try:
        measure = estimate_measure(sub.levels, d, sub.delta0)
    except (InsufficientLevels, ZeroCount) as exc:
        notes.append(f"no measure estimate: {exc}")

    rows = [
        {
            "t": s.t,
            "count": s.count,
            "mu_d": box_counting_measure(s.count, s.t, d, sub.delta0),
            "evals": s.predicate_evals,
            "seconds": s.elapsed,
        }
        for s in sub.levels
    ]
    total_evals = sum(r["evals"] for r in rows)
    if total_evals != expected_subdivision_evals(sub.counts, sub.n):
        raise InvariantViolation("subdivision evaluation total breaks 1 + sum 2^n |Q_{t-1}|")
    if sub.total_evals != total_evals:
        raise InvariantViolation("report totals differ from result totals")

    dense_info = None
    ratio = leaf_ratio = None
    if dense is not None:
        if dense.predicate_evals != 1 << (sub.n * sub.depth):
            raise InvariantViolation("dense evaluation count differs from 2^(nN)")
        dense_info = {
            "depth": dense.depth,
            "total_cells": dense.total_cells,
            "evals": dense.predicate_evals,
            "flagged": dense.count,
            "seconds": dense.elapsed,
            "same_leaves": bool(np.array_equal(dense.flagged_index, sub.leaf_index)),
        }
        ratio = dense.predicate_evals / total_evals
        # 1.0 whenever the two methods flag the same cells
        leaf_ratio = dense.count / sub.counts[-1] if sub.counts[-1] else None

    delta = sub.delta
    log_term = max(1.0, math.log2(sub.delta0 / delta))
    return ComplexityReport(
        n=sub.n,
        m=sub.fiber.m if sub.fiber is not None else None,
        delta0=sub.delta0,
        delta=delta,
        depth=sub.depth,
        d=d,
        rows=rows,
        subdivision_evals=total_evals,
        subdivision_seconds=sum(r["seconds"] for r in rows),
        leaves=sub.counts[-1],
        alpha=sub.predicate_seconds / total_evals,
        fit=fit,
        measure=measure,
        output_size_constant=sub.counts[-1] * delta**d,
        work_constant=total_evals * delta**d / log_term,
        dense=dense_info,
        eval_ratio=ratio,
        leaf_ratio=leaf_ratio,
        root_excluded=sub.root_excluded,
        notes=notes,
    )
