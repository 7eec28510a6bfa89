"""Dyadic voxel algebra.

A voxel of the subdivision is identified by its depth ``t`` and an integer
index vector; its bounds are always recomputed from those integers and the
root box, so no error accumulates with depth.  For axis ``i`` the cell
width is ``w = (hi[i] - lo[i]) * 2**-t`` and the cell with index ``k``
spans ``[lo[i] + k*w, lo[i] + (k+1)*w]`` (the last cell ends exactly at
``hi[i]``).  Because ``k*w`` at depth ``t`` and ``2k*(w/2)`` at depth
``t+1`` are the same real number, siblings tile their parent exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ArityError, NonPositiveResolution


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lo, hi)`` (half-open) or ``[lo, hi]`` when ``closed``."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    closed: bool = False

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("lo and hi must be nonempty and of equal length")
        for a, b in zip(lo, hi):
            if not (math.isfinite(a) and math.isfinite(b) and a < b):
                raise ValueError(f"box axis [{a}, {b}) must satisfy finite lo < hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_bounds(cls, bounds: Sequence[tuple[float, float]], closed: bool = False) -> "Box":
        return cls(tuple(b[0] for b in bounds), tuple(b[1] for b in bounds), closed)

    @property
    def n(self) -> int:
        return len(self.lo)

    @property
    def widths(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    @property
    def diameter(self) -> float:
        return math.hypot(*self.widths)

    @property
    def center(self) -> tuple[float, ...]:
        return tuple(0.5 * (a + b) for a, b in zip(self.lo, self.hi))

    def closure(self) -> "Box":
        return Box(self.lo, self.hi, closed=True)

    def contains(self, p: Sequence[float]) -> bool:
        if len(p) != self.n:
            raise ArityError(f"point of length {len(p)} in {self.n}-box")
        if self.closed:
            return all(a <= x <= b for a, x, b in zip(self.lo, p, self.hi))
        return all(a <= x < b for a, x, b in zip(self.lo, p, self.hi))

    def issubset(self, other: "Box") -> bool:
        return all(a2 <= a1 and b1 <= b2 for a1, b1, a2, b2 in zip(self.lo, self.hi, other.lo, other.hi))


def cell_bounds(root: Box, depth: int, index: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Bounds of dyadic cells as ``(lo, hi)`` arrays of shape ``(k, n)``.

    ``index`` is an integer array of shape ``(k, n)``.  This is the single
    definition of cell geometry shared by every traversal.
    """
    index = np.asarray(index, dtype=np.int64)
    rlo = np.asarray(root.lo)
    rhi = np.asarray(root.hi)
    w = (rhi - rlo) * 2.0**-depth
    lo = rlo + index * w
    hi = rlo + (index + 1) * w
    last = index == (1 << depth) - 1
    hi = np.where(last, rhi, hi)
    return lo, hi


@dataclass(frozen=True, order=True)
class DyadicVoxel:
    """Cell ``index`` at subdivision depth ``depth`` of ``root``.

    Ordering is by depth, then lexicographically by index.
    """

    depth: int
    index: tuple[int, ...]
    root: Box = field(compare=False, repr=False)

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        index = tuple(int(i) for i in self.index)
        if len(index) != self.root.n:
            raise ArityError(f"index of length {len(index)} for {self.root.n}-dimensional root")
        side = 1 << self.depth
        if any(not 0 <= i < side for i in index):
            raise ValueError(f"index {index} out of range for depth {self.depth}")
        object.__setattr__(self, "index", index)

    @classmethod
    def root_voxel(cls, root: Box) -> "DyadicVoxel":
        return cls(0, (0,) * root.n, root)

    @property
    def n(self) -> int:
        return self.root.n

    def parent(self) -> "DyadicVoxel":
        if self.depth == 0:
            raise ValueError("the root voxel has no parent")
        return DyadicVoxel(self.depth - 1, tuple(i >> 1 for i in self.index), self.root)

    def ancestor(self, depth: int) -> "DyadicVoxel":
        if not 0 <= depth <= self.depth:
            raise ValueError(f"no ancestor at depth {depth}")
        shift = self.depth - depth
        return DyadicVoxel(depth, tuple(i >> shift for i in self.index), self.root)


def bounds(v: DyadicVoxel, closed: bool = False) -> Box:
    lo, hi = cell_bounds(v.root, v.depth, np.asarray([v.index]))
    return Box(tuple(lo[0].tolist()), tuple(hi[0].tolist()), closed)


def child_offsets(n: int) -> np.ndarray:
    """All ``2**n`` offset vectors in {0,1}^n, lexicographic order."""
    return np.asarray(list(itertools.product((0, 1), repeat=n)), dtype=np.int64).reshape(-1, n)


def children(v: DyadicVoxel) -> list[DyadicVoxel]:
    base = [2 * i for i in v.index]
    return [
        DyadicVoxel(v.depth + 1, tuple(b + o for b, o in zip(base, off)), v.root)
        for off in itertools.product((0, 1), repeat=v.n)
    ]


def diameter(v: DyadicVoxel) -> float:
    return v.root.diameter * 2.0**-v.depth


def required_depth(delta0: float, delta: float) -> int:
    """Smallest ``N >= 0`` with ``delta0 * 2**-N <= delta``."""
    if not delta > 0:
        raise NonPositiveResolution(f"resolution must be positive, got {delta}")
    if not delta0 > 0:
        raise NonPositiveResolution(f"root diameter must be positive, got {delta0}")
    if delta >= delta0:
        return 0
    n = max(0, math.ceil(math.log2(delta0 / delta)))
    # log2 of a rounded quotient can land one off near powers of two
    while delta0 * 2.0**-n > delta:
        n += 1
    while n > 0 and delta0 * 2.0 ** -(n - 1) <= delta:
        n -= 1
    return n


@dataclass(frozen=True)
class FiberSpec:
    """The fiber ``{x : f_j(x) = y_j for all j}`` of ``n``-variate expressions."""

    exprs: tuple
    y: tuple[float, ...]
    n: int

    def __post_init__(self):
        from .expr import arity

        exprs = tuple(self.exprs)
        y = tuple(float(v) for v in self.y)
        if not exprs:
            raise ValueError("a fiber needs at least one component")
        if len(exprs) != len(y):
            raise ValueError(f"{len(exprs)} expressions but {len(y)} target values")
        for e in exprs:
            if arity(e) > self.n:
                raise ArityError(f"expression arity {arity(e)} exceeds n={self.n}")
        object.__setattr__(self, "exprs", exprs)
        object.__setattr__(self, "y", y)

    @classmethod
    def parse(cls, texts: Sequence[str], y: Sequence[float], n: int) -> "FiberSpec":
        from .expr import parse

        return cls(tuple(parse(t, n) for t in texts), tuple(y), n)

    @property
    def m(self) -> int:
        return len(self.exprs)
