"""Closed-interval arithmetic with outward rounding.

Two layers live here:

* array kernels (``v_add``, ``v_mul``, ...) operating on numpy arrays of lower
  and upper endpoints, used for batched predicate evaluation, and
* the scalar :class:`Interval` type, a thin immutable wrapper over the same
  kernels, so that scalar and batched results agree bit for bit.

Directed rounding is emulated with error-free transformations: every basic
operation is computed in round-to-nearest together with the sign of its
rounding error, and an endpoint is moved one ulp outward only when the
rounded value lies on the wrong side of the exact result.  Where the
transformation is not reliable (overflow, underflow, huge operands) the
endpoint is nudged unconditionally.  Transcendental functions are nudged by
``TRANSCENDENTAL_ULPS`` since libm results are not correctly rounded.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .errors import DomainClampWarning, DomainError

__all__ = [
    "Interval",
    "EMPTY",
    "PI",
    "interval_binary",
    "interval_unary",
    "interval_contains",
]

_INF = math.inf
_SPLIT = 134217729.0  # 2**27 + 1, Dekker splitter
_BIG = 2.0**996
_TINY = 2.0**-960

TRANSCENDENTAL_ULPS = 4


# ---------------------------------------------------------------------------
# error-free transformations
# ---------------------------------------------------------------------------


def _two_sum(a, b):
    """Return ``(s, err)`` with ``s = fl(a + b)`` and ``err`` the exact residual.

    ``err`` is NaN where the residual is unknown (overflow) and 0 where an
    input is infinite (the sum is then an exact limit).
    """
    with np.errstate(invalid="ignore", over="ignore"):
        s = a + b
        bb = s - a
        err = (a - (s - bb)) + (b - bb)
    finite_in = np.isfinite(a) & np.isfinite(b)
    err = np.where(finite_in, np.where(np.isfinite(s), err, np.nan), 0.0)
    return s, err


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    """Return ``(p, err)`` with ``p = fl(a * b)``; 0*inf is taken as exact 0."""
    with np.errstate(invalid="ignore", over="ignore", under="ignore"):
        zero = (a == 0) | (b == 0)
        p = np.where(zero, 0.0, a * b)
        ah, al = _split(a)
        bh, bl = _split(b)
        err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    aa, ab, ap = np.abs(a), np.abs(b), np.abs(p)
    reliable = (aa < _BIG) & (ab < _BIG) & (ap > _TINY) & (ap < _BIG)
    infinite_in = ~(np.isfinite(a) & np.isfinite(b))
    err = np.where(zero | infinite_in, 0.0, np.where(reliable, err, np.nan))
    # a product that underflowed to zero still has a known sign
    err = np.where((p == 0) & ~zero, np.sign(a) * np.sign(b), err)
    return p, err


def _two_div(a, b):
    """Return ``(q, err)`` where ``err`` carries the sign of ``a/b - q``."""
    with np.errstate(invalid="ignore", over="ignore", under="ignore", divide="ignore"):
        q = a / b
        p, e = _two_prod(q, b)
        r = (a - p) - e
    aa, ab, aq = np.abs(a), np.abs(b), np.abs(q)
    reliable = (
        (aa > _TINY) & (aa < _BIG) & (ab > _TINY) & (ab < _BIG)
        & (aq > _TINY) & (aq < _BIG) & np.isfinite(e)
    )
    exact = (a == 0) | ~(np.isfinite(a) & np.isfinite(b))
    err = np.where(b > 0, r, -r)
    err = np.where(exact, 0.0, np.where(reliable, err, np.nan))
    err = np.where((q == 0) & (a != 0) & np.isfinite(b), np.sign(a) * np.sign(b), err)
    return q, err


def _down(x, err):
    return np.where(err >= 0, x, np.nextafter(x, -_INF))


def _up(x, err):
    return np.where(err <= 0, x, np.nextafter(x, _INF))


def _nudge(x, ulps, direction):
    for _ in range(ulps):
        x = np.nextafter(x, direction)
    return x


def _fmin(*xs):
    out = xs[0]
    for x in xs[1:]:
        out = np.fmin(out, x)
    return out


def _fmax(*xs):
    out = xs[0]
    for x in xs[1:]:
        out = np.fmax(out, x)
    return out


def _as_array(x):
    return np.asarray(x, dtype=np.float64)


# ---------------------------------------------------------------------------
# array kernels: every function takes endpoint arrays and returns (lo, hi) or
# (lo, hi, bad) where ``bad`` marks elements outside the operation's domain;
# bad elements are returned as the whole real line.
# ---------------------------------------------------------------------------


def v_add(alo, ahi, blo, bhi):
    s, e = _two_sum(alo, blo)
    lo = _down(s, e)
    s, e = _two_sum(ahi, bhi)
    return lo, _up(s, e)


def v_sub(alo, ahi, blo, bhi):
    return v_add(alo, ahi, -bhi, -blo)


def v_neg(alo, ahi):
    return -ahi, -alo


def v_mul(alo, ahi, blo, bhi):
    downs, ups = [], []
    for x, y in ((alo, blo), (alo, bhi), (ahi, blo), (ahi, bhi)):
        p, e = _two_prod(x, y)
        downs.append(_down(p, e))
        ups.append(_up(p, e))
    return _fmin(*downs), _fmax(*ups)


def v_div(alo, ahi, blo, bhi):
    bad = (blo <= 0) & (bhi >= 0)
    # keep the arithmetic below well-defined on bad lanes
    sblo = np.where(bad, 1.0, blo)
    sbhi = np.where(bad, 1.0, bhi)
    downs, ups = [], []
    for x, y in ((alo, sblo), (alo, sbhi), (ahi, sblo), (ahi, sbhi)):
        q, e = _two_div(x, y)
        downs.append(_down(q, e))
        ups.append(_up(q, e))
    lo = np.where(bad, -_INF, _fmin(*downs))
    hi = np.where(bad, _INF, _fmax(*ups))
    return lo, hi, bad


def _pow_nonneg(x, k, rounder):
    # x >= 0, k >= 1; every partial product is rounded in the same direction,
    # which stays a valid bound since all factors are nonnegative.
    r = x
    for _ in range(k - 1):
        p, e = _two_prod(r, x)
        r = rounder(p, e)
    return r


def v_pow_int(alo, ahi, k: int):
    if k == 0:
        one = np.ones_like(alo)
        return one, one.copy(), np.zeros(np.shape(alo), dtype=bool)
    if k < 0:
        plo, phi, _ = v_pow_int(alo, ahi, -k)
        one = np.ones_like(alo)
        return v_div(one, one, plo, phi)
    no_bad = np.zeros(np.shape(alo), dtype=bool)
    if k == 1:
        return alo, ahi, no_bad
    if k % 2 == 1:
        lo = np.where(
            alo >= 0,
            _pow_nonneg(np.abs(alo), k, _down),
            -_pow_nonneg(np.abs(alo), k, _up),
        )
        hi = np.where(
            ahi >= 0,
            _pow_nonneg(np.abs(ahi), k, _up),
            -_pow_nonneg(np.abs(ahi), k, _down),
        )
        return lo, hi, no_bad
    mag_lo = np.where(alo >= 0, alo, np.where(ahi <= 0, -ahi, 0.0))
    mag_hi = np.maximum(np.abs(alo), np.abs(ahi))
    return _pow_nonneg(mag_lo, k, _down), _pow_nonneg(mag_hi, k, _up), no_bad


def v_sqr(alo, ahi):
    lo, hi, _ = v_pow_int(alo, ahi, 2)
    return lo, hi


def v_abs(alo, ahi):
    lo = np.where(alo >= 0, alo, np.where(ahi <= 0, -ahi, 0.0))
    hi = np.maximum(np.abs(alo), np.abs(ahi))
    return lo, hi


def v_min(alo, ahi, blo, bhi):
    return np.minimum(alo, blo), np.minimum(ahi, bhi)


def v_max(alo, ahi, blo, bhi):
    return np.maximum(alo, blo), np.maximum(ahi, bhi)


def _sqrt_bound(x, rounder):
    with np.errstate(invalid="ignore", under="ignore"):
        s = np.sqrt(x)
        p, e = _two_prod(s, s)
        r = (x - p) - e
    exact = (x == 0) | np.isinf(x)
    reliable = (x > _TINY) & (x < _BIG) & np.isfinite(e)
    err = np.where(exact, 0.0, np.where(reliable, r, np.nan))
    return rounder(s, err)


def v_sqrt(alo, ahi):
    """Return ``(lo, hi, bad, clamped)``; ``clamped`` marks inputs with lo < 0."""
    bad = ahi < 0
    clamped = (alo < 0) & ~bad
    lo = _sqrt_bound(np.maximum(alo, 0.0), _down)
    hi = _sqrt_bound(np.maximum(ahi, 0.0), _up)
    lo = np.where(bad, -_INF, lo)
    hi = np.where(bad, _INF, hi)
    return lo, hi, bad, clamped


def v_exp(alo, ahi):
    with np.errstate(over="ignore", under="ignore"):
        lo = np.maximum(_nudge(np.exp(alo), TRANSCENDENTAL_ULPS, -_INF), 0.0)
        hi = _nudge(np.exp(ahi), TRANSCENDENTAL_ULPS, _INF)
    # exp(-inf) == 0 and exp(+inf) == inf are exact
    lo = np.where(alo == -_INF, 0.0, lo)
    hi = np.where(ahi == _INF, _INF, hi)
    return lo, hi


# pi enclosed by 2 ulps on each side of the nearest double
PI_LO = float(_nudge(np.float64(math.pi), 2, -_INF))
PI_HI = float(_nudge(np.float64(math.pi), 2, _INF))
_TWO_PI = 2.0 * math.pi
# beyond this magnitude argument reduction in doubles is meaningless
_REDUCTION_LIMIT = 2.0**40


def _hits_lattice(lo, hi, offset):
    """Conservatively decide whether ``offset + 2*pi*k`` lies in [lo, hi] for some k."""
    with np.errstate(invalid="ignore"):
        u = (lo - offset) / _TWO_PI
        v = (hi - offset) / _TWO_PI
    slack_u = 1e-9 + 1e-13 * np.abs(u)
    slack_v = 1e-9 + 1e-13 * np.abs(v)
    return np.ceil(u - slack_u) <= np.floor(v + slack_v)


def _trig(alo, ahi, fn, max_at, min_at):
    wide = (
        ~np.isfinite(alo) | ~np.isfinite(ahi)
        | ((ahi - alo) >= 2.0 * PI_LO)
        | (np.abs(alo) > _REDUCTION_LIMIT) | (np.abs(ahi) > _REDUCTION_LIMIT)
    )
    slo = np.where(wide, 0.0, alo)
    shi = np.where(wide, 0.0, ahi)
    f1, f2 = fn(slo), fn(shi)
    lo = _nudge(np.minimum(f1, f2), TRANSCENDENTAL_ULPS, -_INF)
    hi = _nudge(np.maximum(f1, f2), TRANSCENDENTAL_ULPS, _INF)
    hi = np.where(_hits_lattice(slo, shi, max_at), 1.0, np.minimum(hi, 1.0))
    lo = np.where(_hits_lattice(slo, shi, min_at), -1.0, np.maximum(lo, -1.0))
    return np.where(wide, -1.0, lo), np.where(wide, 1.0, hi)


def v_sin(alo, ahi):
    return _trig(alo, ahi, np.sin, 0.5 * math.pi, -0.5 * math.pi)


def v_cos(alo, ahi):
    return _trig(alo, ahi, np.cos, 0.0, math.pi)


# ---------------------------------------------------------------------------
# scalar interval type
# ---------------------------------------------------------------------------


class Interval:
    """Immutable closed interval ``[lo, hi]``.

    Endpoints may be infinite but never NaN, and ``lo <= hi`` always holds.
    The empty interval is the distinguished singleton :data:`EMPTY`, whose
    endpoints are ``None``.
    """

    __slots__ = ("lo", "hi")

    def __init__(self, lo: float, hi: float | None = None):
        lo = float(lo)
        hi = lo if hi is None else float(hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if lo > hi:
            raise ValueError(f"inverted interval endpoints [{lo}, {hi}]")
        if lo == _INF or hi == -_INF:
            raise ValueError("interval must contain a real number")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def _raw(cls, lo, hi) -> "Interval":
        obj = object.__new__(cls)
        object.__setattr__(obj, "lo", float(lo))
        object.__setattr__(obj, "hi", float(hi))
        return obj

    @classmethod
    def empty(cls) -> "Interval":
        return EMPTY

    @classmethod
    def entire(cls) -> "Interval":
        return cls._raw(-_INF, _INF)

    def __setattr__(self, name, value):
        raise AttributeError("Interval is immutable")

    def __reduce__(self):
        if self.is_empty:
            return (Interval.empty, ())
        return (Interval, (self.lo, self.hi))

    @property
    def is_empty(self) -> bool:
        return self.lo is None

    @property
    def width(self) -> float:
        return 0.0 if self.is_empty else self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, v: float) -> bool:
        return not self.is_empty and self.lo <= v <= self.hi

    __contains__ = contains

    def issubset(self, other: "Interval") -> bool:
        if self.is_empty:
            return True
        if other.is_empty:
            return False
        return other.lo <= self.lo and self.hi <= other.hi

    def hull(self, other: "Interval") -> "Interval":
        if self.is_empty:
            return other
        if other.is_empty:
            return self
        return Interval._raw(min(self.lo, other.lo), max(self.hi, other.hi))

    def __eq__(self, other):
        if not isinstance(other, Interval):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __repr__(self):
        if self.is_empty:
            return "Interval.empty()"
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __add__(self, other):
        return interval_binary("add", self, _coerce(other))

    def __radd__(self, other):
        return interval_binary("add", _coerce(other), self)

    def __sub__(self, other):
        return interval_binary("sub", self, _coerce(other))

    def __rsub__(self, other):
        return interval_binary("sub", _coerce(other), self)

    def __mul__(self, other):
        return interval_binary("mul", self, _coerce(other))

    def __rmul__(self, other):
        return interval_binary("mul", _coerce(other), self)

    def __truediv__(self, other):
        return interval_binary("div", self, _coerce(other))

    def __rtruediv__(self, other):
        return interval_binary("div", _coerce(other), self)

    def __pow__(self, k):
        if not isinstance(k, int):
            raise TypeError("only integer exponents are supported")
        return interval_binary("pow_int", self, Interval(k))

    def __neg__(self):
        return interval_unary("neg", self)

    def __abs__(self):
        return interval_unary("abs", self)


EMPTY = object.__new__(Interval)
object.__setattr__(EMPTY, "lo", None)
object.__setattr__(EMPTY, "hi", None)

PI = Interval(PI_LO, PI_HI)


def _coerce(x) -> Interval:
    return x if isinstance(x, Interval) else Interval(x)


def _pack(lo, hi) -> Interval:
    return Interval._raw(lo, hi)


_BINARY = {"add": v_add, "sub": v_sub, "mul": v_mul, "min": v_min, "max": v_max}


def interval_binary(op: str, a: Interval, b: Interval, extended: bool = False) -> Interval:
    """Apply binary ``op`` to two intervals with outward rounding.

    ``op`` is one of add, sub, mul, div, pow_int, min, max.  For ``pow_int``
    the second operand must be a degenerate interval holding an integer.
    Division by an interval containing 0 raises :class:`DomainError` unless
    ``extended`` is set, in which case the whole real line is returned.
    """
    if a.is_empty or b.is_empty:
        return EMPTY
    alo, ahi = _as_array(a.lo), _as_array(a.hi)
    if op == "pow_int":
        k = b.lo
        if b.lo != b.hi or not float(k).is_integer():
            raise ValueError(f"pow_int needs an integer exponent, got {b!r}")
        lo, hi, bad = v_pow_int(alo, ahi, int(k))
    elif op == "div":
        lo, hi, bad = v_div(alo, ahi, _as_array(b.lo), _as_array(b.hi))
    elif op in _BINARY:
        lo, hi = _BINARY[op](alo, ahi, _as_array(b.lo), _as_array(b.hi))
        bad = False
    else:
        raise ValueError(f"unknown binary interval op {op!r}")
    if bool(bad) and not extended:
        raise DomainError(f"{op}: divisor {b!r} contains 0")
    return _pack(lo, hi)


_UNARY = {"neg": v_neg, "abs": v_abs, "sqr": v_sqr, "exp": v_exp, "sin": v_sin, "cos": v_cos}


def interval_unary(op: str, a: Interval) -> Interval:
    """Apply unary ``op`` (neg, sin, cos, exp, sqrt, abs, sqr) to an interval.

    ``sqrt`` of an interval straddling 0 is clipped to its nonnegative part
    and emits :class:`DomainClampWarning`; a strictly negative input raises
    :class:`DomainError`.
    """
    if a.is_empty:
        return EMPTY
    alo, ahi = _as_array(a.lo), _as_array(a.hi)
    if op == "sqrt":
        lo, hi, bad, clamped = v_sqrt(alo, ahi)
        if bool(bad):
            raise DomainError(f"sqrt of strictly negative interval {a!r}")
        if bool(clamped):
            warnings.warn(f"sqrt argument {a!r} clipped at 0", DomainClampWarning, stacklevel=2)
        return _pack(lo, hi)
    try:
        fn = _UNARY[op]
    except KeyError:
        raise ValueError(f"unknown unary interval op {op!r}") from None
    lo, hi = fn(alo, ahi)
    return _pack(lo, hi)


def interval_contains(a: Interval, v: float) -> bool:
    return a.contains(v)
