"""Catalog of fibers with known geometry.

Every shipped fiber is a separable sum ``sum_i g_i(x_i) = c`` with each
``g_i`` one of ``0``, ``x``, ``x**2`` or ``-x**2``.  The range of such a sum
over a box is exactly the interval between the sums of per-axis minima and
maxima, so the exact predicates below evaluate those in rational arithmetic
(:class:`fractions.Fraction`) and share no code with the interval kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .geometry import Box, FiberSpec
from .subdivide import PredicateDecision, oracle_predicate


def _term_range(kind: str, a: Fraction, b: Fraction) -> tuple[Fraction, Fraction]:
    if kind == "0":
        return Fraction(0), Fraction(0)
    if kind == "x":
        return a, b
    sq_lo = Fraction(0) if a <= 0 <= b else min(a * a, b * b)
    sq_hi = max(a * a, b * b)
    if kind == "x2":
        return sq_lo, sq_hi
    if kind == "-x2":
        return -sq_hi, -sq_lo
    raise ValueError(f"unknown term kind {kind!r}")


def separable_predicate(terms: tuple[str, ...], target: float) -> Callable[[Box], PredicateDecision]:
    """Exact closed-box test for ``sum_i terms[i](x_i) == target``."""
    c = Fraction(target)

    def decide(box: Box) -> PredicateDecision:
        lo = hi = Fraction(0)
        for kind, a, b in zip(terms, box.lo, box.hi):
            tl, th = _term_range(kind, Fraction(a), Fraction(b))
            lo += tl
            hi += th
        return PredicateDecision.POSSIBLE if lo <= c <= hi else PredicateDecision.EXCLUDED

    return decide


@dataclass(frozen=True)
class TestFiber:
    """A fiber with an exact predicate, a point sampler and known invariants.

    ``sampler(seed, k)`` returns ``k`` points on the fiber as a ``(k, n)``
    array; ``seed=None`` gives a deterministic, evenly spread set.
    """

    __test__ = False  # keep pytest from collecting this class

    name: str
    fiber: FiberSpec
    root: Box
    terms: tuple[str, ...]
    target: float
    sampler: Callable[[Optional[int], int], np.ndarray]
    true_dimension: int
    true_measure: Optional[float] = None
    gated: bool = True

    @property
    def n(self) -> int:
        return self.root.n

    @property
    def exact_predicate(self) -> Callable[[Box], PredicateDecision]:
        return separable_predicate(self.terms, self.target)

    def oracle(self):
        return oracle_predicate(self.exact_predicate, name=f"exact:{self.name}")


def _rng(seed):
    return np.random.default_rng(seed)


def _line_sampler(n: int, axis: int, value: float):
    def sample(seed, k):
        if seed is None:
            free = np.tile((np.arange(k) / k)[:, None], (1, n))
        else:
            free = _rng(seed).random((k, n))
        free[:, axis] = value
        return free

    return sample


def _circle_sampler(seed, k):
    if seed is None:
        theta = 2.0 * math.pi * np.arange(k) / k
    else:
        theta = _rng(seed).uniform(0.0, 2.0 * math.pi, k)
    return np.column_stack([np.cos(theta), np.sin(theta)])


def _sphere_sampler(seed, k):
    if seed is None:
        # Fibonacci lattice
        i = np.arange(k) + 0.5
        z = 1.0 - 2.0 * i / k
        r = np.sqrt(1.0 - z * z)
        phi = math.pi * (3.0 - math.sqrt(5.0)) * i
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    g = _rng(seed).standard_normal((k, 3))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _cone_sampler(seed, k):
    rng = _rng(0 if seed is None else seed)
    z = rng.uniform(-1.0, 1.0, k)
    theta = rng.uniform(0.0, 2.0 * math.pi, k)
    r = np.abs(z)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta), z])


def _box_sampler(root: Box):
    def sample(seed, k):
        rng = _rng(0 if seed is None else seed)
        return np.asarray(root.lo) + rng.random((k, root.n)) * np.asarray(root.widths)

    return sample


def _empty_sampler(n):
    def sample(seed, k):
        return np.zeros((0, n))

    return sample


def _unit(n):
    return Box((0.0,) * n, (1.0,) * n)


def _centered(n, r=2.0):
    return Box((-r,) * n, (r,) * n)


def catalog() -> list[TestFiber]:
    """All shipped fibers; ``gated`` ones are used by the acceptance suite."""
    return [
        TestFiber(
            "axis-line", FiberSpec.parse(["x1"], [0.0], 2), _unit(2), ("x", "0"), 0.0,
            _line_sampler(2, 0, 0.0), 1, 1.0,
        ),
        TestFiber(
            "offset-line", FiberSpec.parse(["x1"], [0.5], 2), _unit(2), ("x", "0"), 0.5,
            _line_sampler(2, 0, 0.5), 1, 1.0,
        ),
        TestFiber(
            "circle", FiberSpec.parse(["x^2 + y^2 - 1"], [0.0], 2), _centered(2), ("x2", "x2"), 1.0,
            _circle_sampler, 1, 2.0 * math.pi,
        ),
        TestFiber(
            "sphere", FiberSpec.parse(["x^2 + y^2 + z^2 - 1"], [0.0], 3), _centered(3),
            ("x2", "x2", "x2"), 1.0, _sphere_sampler, 2, 4.0 * math.pi,
        ),
        TestFiber(
            "plane", FiberSpec.parse(["x3"], [0.3], 3), _unit(3), ("0", "0", "x"), 0.3,
            _line_sampler(3, 2, 0.3), 2, 1.0,
        ),
        TestFiber(
            "full-square", FiberSpec.parse(["0"], [0.0], 2), _unit(2), ("0", "0"), 0.0,
            _box_sampler(_unit(2)), 2, 1.0,
        ),
        TestFiber(
            "full-cube", FiberSpec.parse(["0"], [0.0], 3), _unit(3), ("0", "0", "0"), 0.0,
            _box_sampler(_unit(3)), 3, 1.0,
        ),
        TestFiber(
            "empty", FiberSpec.parse(["x^2 + y^2"], [100.0], 2), _unit(2), ("x2", "x2"), 100.0,
            _empty_sampler(2), 0, None,
        ),
        # the cone vertex is a non-regular value: demo only, not gated
        TestFiber(
            "cone", FiberSpec.parse(["x^2 + y^2 - z^2"], [0.0], 3), Box((-1.0,) * 3, (1.0,) * 3),
            ("x2", "x2", "-x2"), 0.0, _cone_sampler, 2, 2.0 * math.sqrt(2.0) * math.pi, gated=False,
        ),
    ]


def get(name: str) -> TestFiber:
    for fiber in catalog():
        if fiber.name == name:
            return fiber
    raise KeyError(f"no catalog fiber named {name!r}; known: {', '.join(f.name for f in catalog())}")
