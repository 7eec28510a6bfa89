"""Breadth-first orthree refinement of a root box around a fiber.

Round ``t`` takes every voxel kept at depth ``t-1``, forms its ``2**n``
children, asks the predicate about each child's closure and keeps the
children that may touch the fiber.  Per-level counts, predicate evaluations
and timings are recorded since they are what the complexity analysis is
about.
"""

from __future__ import annotations

import enum
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, InvariantViolation, ResourceLimit
from .expr import eval_interval, eval_interval_batch
from .geometry import Box, DyadicVoxel, FiberSpec, cell_bounds, child_offsets, required_depth

DEFAULT_BUDGET = 10**8
CHUNK = 1 << 15


class PredicateDecision(enum.Enum):
    EXCLUDED = "excluded"
    POSSIBLE = "possible"


class Predicate:
    """Instrumented voxel-intersection test.

    ``decide_fn`` maps a closed :class:`Box` to a :class:`PredicateDecision`.
    ``batch_fn``, when given, maps ``(lo, hi)`` arrays of shape ``(k, n)`` to
    a boolean array (True = possible) and must agree with ``decide_fn``.
    Both must be pure.  Every decision, scalar or batched, increments
    :attr:`evals` by one and its wall time is added to :attr:`seconds`.
    """

    def __init__(self, decide_fn: Callable[[Box], PredicateDecision], batch_fn=None, name: str = "predicate"):
        self._decide_fn = decide_fn
        self._batch_fn = batch_fn
        self.name = name
        self.evals = 0
        self.seconds = 0.0
        self.domain_warnings = 0
        self._lock = threading.Lock()

    def _record(self, count, seconds, warnings=0):
        with self._lock:
            self.evals += count
            self.seconds += seconds
            self.domain_warnings += warnings

    def decide(self, box: Box) -> PredicateDecision:
        start = time.perf_counter()
        decision = self._decide_fn(box if box.closed else box.closure())
        self._record(1, time.perf_counter() - start)
        return decision

    __call__ = decide

    def decide_batch(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        start = time.perf_counter()
        k = len(lo)
        if self._batch_fn is not None:
            result = self._batch_fn(lo, hi)
            warnings = 0
            if isinstance(result, tuple):
                result, warnings = result
            mask = np.asarray(result, dtype=bool)
        else:
            warnings = 0
            mask = np.fromiter(
                (
                    self._decide_fn(Box(tuple(a), tuple(b), closed=True)) is PredicateDecision.POSSIBLE
                    for a, b in zip(lo.tolist(), hi.tolist())
                ),
                dtype=bool,
                count=k,
            )
        self._record(k, time.perf_counter() - start, warnings)
        return mask

    @property
    def alpha(self) -> float:
        """Mean seconds per evaluation so far (NaN before the first call)."""
        return self.seconds / self.evals if self.evals else float("nan")

    def reset(self) -> None:
        with self._lock:
            self.evals = 0
            self.seconds = 0.0
            self.domain_warnings = 0


def interval_predicate(fiber: FiberSpec) -> Predicate:
    """Predicate that excludes a box when some component's enclosure misses its target."""

    def decide(box: Box) -> PredicateDecision:
        for e, y in zip(fiber.exprs, fiber.y):
            try:
                enc = eval_interval(e, box)
            except DomainError:
                predicate.domain_warnings += 1
                continue
            if not enc.contains(y):
                return PredicateDecision.EXCLUDED
        return PredicateDecision.POSSIBLE

    def batch(lo, hi):
        possible = np.ones(len(lo), dtype=bool)
        warnings = 0
        for e, y in zip(fiber.exprs, fiber.y):
            enc = eval_interval_batch(e, lo, hi)
            warnings += enc.domain_errors
            possible &= (enc.lo <= y) & (y <= enc.hi)
        return possible, warnings

    predicate = Predicate(decide, batch, name="interval")
    return predicate


def oracle_predicate(decision: Callable[[Box], PredicateDecision], batch=None, name: str = "oracle") -> Predicate:
    """Wrap a caller-supplied exact decision procedure with instrumentation.

    ``decision`` may also return a plain bool (True = possible).
    """

    def decide(box):
        d = decision(box)
        if isinstance(d, PredicateDecision):
            return d
        return PredicateDecision.POSSIBLE if d else PredicateDecision.EXCLUDED

    return Predicate(decide, batch, name=name)


def as_predicate(fiber_or_predicate) -> Predicate:
    if isinstance(fiber_or_predicate, Predicate):
        return fiber_or_predicate
    if isinstance(fiber_or_predicate, FiberSpec):
        return interval_predicate(fiber_or_predicate)
    raise TypeError(f"expected FiberSpec or Predicate, got {type(fiber_or_predicate).__name__}")


MIN_CHUNK = 256


def split_chunk(k: int, workers: int, chunk: int) -> int:
    """Chunk size giving every worker a share of ``k`` items, never above ``chunk``."""
    if workers <= 1:
        return chunk
    return max(1, min(chunk, max(MIN_CHUNK, -(-k // workers))))


def evaluate_cells(
    predicate: Predicate, root: Box, depth: int, index: np.ndarray, workers: int = 1, chunk: int = CHUNK
) -> np.ndarray:
    """Possible-mask for the closures of the given depth-``depth`` cells.

    Work is split into fixed chunks; results are concatenated in input order,
    so the mask does not depend on ``workers``.
    """
    k = len(index)
    if k == 0:
        return np.zeros(0, dtype=bool)
    chunk = split_chunk(k, workers, chunk)
    starts = range(0, k, chunk)

    def run(start):
        idx = index[start:start + chunk]
        lo, hi = cell_bounds(root, depth, idx)
        return predicate.decide_batch(lo, hi)

    if workers <= 1 or k <= chunk:
        parts = [run(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, starts))
    return np.concatenate(parts)


def lexsorted(index: np.ndarray) -> np.ndarray:
    if len(index) <= 1:
        return index
    # np.lexsort treats the last key as primary
    order = np.lexsort(index.T[::-1])
    return index[order]


@dataclass(frozen=True)
class LevelStats:
    t: int
    count: int
    predicate_evals: int
    elapsed: float
    mu_d: Optional[float] = None


@dataclass(frozen=True)
class SubdivisionResult:
    """Outcome of :func:`subdivide`.

    ``level_indices[t]`` is the ``(|Q_t|, n)`` index array of the voxels kept
    at depth ``t``, sorted lexicographically; ``levels[t]`` their statistics.
    """

    root: Box
    depth: int
    delta: float
    delta0: float
    levels: tuple[LevelStats, ...]
    level_indices: tuple[np.ndarray, ...] = field(repr=False)
    fiber: Optional[FiberSpec] = None
    root_excluded: bool = False
    domain_warnings: int = 0
    predicate_seconds: float = 0.0

    @property
    def n(self) -> int:
        return self.root.n

    @property
    def leaf_index(self) -> np.ndarray:
        return self.level_indices[-1]

    @property
    def leaves(self) -> list[DyadicVoxel]:
        return [DyadicVoxel(self.depth, tuple(row), self.root) for row in self.leaf_index.tolist()]

    def level(self, t: int) -> list[DyadicVoxel]:
        return [DyadicVoxel(t, tuple(row), self.root) for row in self.level_indices[t].tolist()]

    @property
    def counts(self) -> list[int]:
        return [s.count for s in self.levels]

    @property
    def total_evals(self) -> int:
        return sum(s.predicate_evals for s in self.levels)


def subdivide(
    fiber_or_predicate,
    root: Box,
    delta: Optional[float] = None,
    max_depth_override: Optional[int] = None,
    *,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
    chunk: int = CHUNK,
    d: Optional[float] = None,
) -> SubdivisionResult:
    """Approximate a fiber by dyadic voxels of diameter at most ``delta``.

    Runs ``N = required_depth(root.diameter, delta)`` refinement rounds, or
    ``max_depth_override`` rounds when given, and returns every voxel kept at
    depth ``N``.  Raises :class:`ResourceLimit` when a round would test more
    than ``budget`` voxels.  When ``d`` is given each level also records
    its box-counting measure.
    """
    predicate = as_predicate(fiber_or_predicate)
    fiber = fiber_or_predicate if isinstance(fiber_or_predicate, FiberSpec) else None
    delta0 = root.diameter
    if max_depth_override is not None:
        if max_depth_override < 0:
            raise ValueError("depth override must be >= 0")
        depth = int(max_depth_override)
    elif delta is None:
        raise ValueError("give a resolution delta or a depth override")
    else:
        depth = required_depth(delta0, delta)
    if delta is None:
        delta = delta0 * 2.0**-depth
    n = root.n
    branching = 1 << n
    offsets = child_offsets(n)
    start_evals, start_seconds, start_warn = predicate.evals, predicate.seconds, predicate.domain_warnings

    t0 = time.perf_counter()
    current = np.zeros((1, n), dtype=np.int64)
    keep = evaluate_cells(predicate, root, 0, current)
    current = current[keep]
    root_excluded = not bool(keep[0])
    levels = [LevelStats(0, len(current), 1, time.perf_counter() - t0)]
    indices = [current]

    for t in range(1, depth + 1):
        t0 = time.perf_counter()
        candidates = len(current) * branching
        if candidates > budget:
            raise ResourceLimit(f"round {t} would test {candidates} voxels, budget is {budget}")
        kids = (2 * current[:, None, :] + offsets[None, :, :]).reshape(-1, n)
        keep = evaluate_cells(predicate, root, t, kids, workers, chunk)
        current = lexsorted(kids[keep])
        levels.append(LevelStats(t, len(current), candidates, time.perf_counter() - t0))
        indices.append(current)

    if d is not None:
        levels = [replace(s, mu_d=s.count * delta0**d * 2.0 ** (-s.t * d)) for s in levels]
    if predicate.evals - start_evals != sum(s.predicate_evals for s in levels):
        raise InvariantViolation("predicate evaluation count disagrees with the per-level ledger")
    return SubdivisionResult(
        root=root,
        depth=depth,
        delta=float(delta),
        delta0=delta0,
        levels=tuple(levels),
        level_indices=tuple(indices),
        fiber=fiber,
        root_excluded=root_excluded,
        domain_warnings=predicate.domain_warnings - start_warn,
        predicate_seconds=predicate.seconds - start_seconds,
    )


def measure_sequence(result: SubdivisionResult, d: float) -> list[float]:
    """Box-counting measure ``|Q_t| * delta0**d * 2**(-t*d)`` for every level."""
    if d < 0:
        raise ValueError("d must be >= 0")
    return [s.count * result.delta0**d * 2.0 ** (-s.t * d) for s in result.levels]
