"""Exhaustive baseline: test every cell of the depth-N dyadic grid.

Cells are visited in linear order ``0 .. 2**(n*N) - 1``, decoded to index
vectors with the first axis most significant, so flagged cells come out in
lexicographic order without sorting.  Nothing here walks a tree, which is
what makes the scan usable as an oracle for :func:`fiberdiv.subdivide`.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ResourceLimit
from .geometry import Box, DyadicVoxel, cell_bounds, required_depth
from .subdivide import DEFAULT_BUDGET, as_predicate, split_chunk

CHUNK = 1 << 16


@dataclass(frozen=True)
class DenseResult:
    root: Box
    depth: int
    delta: float
    flagged_index: np.ndarray = field(repr=False)
    total_cells: int
    predicate_evals: int
    elapsed: float
    predicate_seconds: float = 0.0

    @property
    def flagged(self) -> list[DyadicVoxel]:
        return [DyadicVoxel(self.depth, tuple(row), self.root) for row in self.flagged_index.tolist()]

    @property
    def count(self) -> int:
        return len(self.flagged_index)


def decode_linear(ids: np.ndarray, n: int, depth: int) -> np.ndarray:
    """Map linear cell ids to index vectors, first axis most significant."""
    out = np.empty((len(ids), n), dtype=np.int64)
    rest = ids.astype(np.int64)
    mask = (1 << depth) - 1
    for axis in range(n - 1, -1, -1):
        out[:, axis] = rest & mask
        rest = rest >> depth
    return out


def dense_scan(
    fiber_or_predicate,
    root: Box,
    delta: Optional[float] = None,
    depth: Optional[int] = None,
    *,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
    chunk: int = CHUNK,
) -> DenseResult:
    """Evaluate the predicate on the closure of every depth-N cell of ``root``."""
    predicate = as_predicate(fiber_or_predicate)
    n = root.n
    if depth is None:
        if delta is None:
            raise ValueError("give a resolution delta or a depth")
        depth = required_depth(root.diameter, delta)
    if delta is None:
        delta = root.diameter * 2.0**-depth
    total = 1 << (n * depth)
    if total > budget:
        raise ResourceLimit(f"dense grid has {total} cells, budget is {budget}")

    start = time.perf_counter()
    seconds0 = predicate.seconds
    chunk = split_chunk(total, workers, chunk)

    def scan(first):
        ids = np.arange(first, min(first + chunk, total), dtype=np.int64)
        idx = decode_linear(ids, n, depth)
        lo, hi = cell_bounds(root, depth, idx)
        return idx[predicate.decide_batch(lo, hi)]

    firsts = range(0, total, chunk)
    if workers <= 1 or total <= chunk:
        parts = [scan(f) for f in firsts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(scan, firsts))
    flagged = np.concatenate(parts) if parts else np.zeros((0, n), dtype=np.int64)
    return DenseResult(
        root=root,
        depth=depth,
        delta=float(delta),
        flagged_index=flagged,
        total_cells=total,
        predicate_evals=total,
        elapsed=time.perf_counter() - start,
        predicate_seconds=predicate.seconds - seconds0,
    )
