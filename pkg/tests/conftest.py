import math

import numpy as np
import pytest

from fiberdiv.expr import Binary, Constant, Unary, Variable

_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, title, passed, detail)``."""

    def record(number, title, passed, detail=""):
        line = f"criterion {number:<3} {'PASS' if passed else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        _CRITERIA.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)


SAFE_UNARY = ("neg", "abs", "sqr", "sin", "cos", "exp")
SAFE_BINARY = ("add", "sub", "mul", "min", "max")


def random_expr(rng, n, depth=4, unary=SAFE_UNARY, binary=SAFE_BINARY, allow_div=False, allow_sqrt=False):
    """Random expression tree over x1..xn with nonnegative literal constants."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.6:
            return Variable(int(rng.integers(1, n + 1)))
        if rng.random() < 0.1:
            return Constant(math.pi, "pi")
        if rng.random() < 0.5:
            return Constant(float(rng.integers(0, 10)))
        return Constant(float(np.round(rng.uniform(0, 5), 3)))
    r = rng.random()
    if r < 0.3:
        ops = list(unary) + (["sqrt"] if allow_sqrt else [])
        return Unary(str(rng.choice(ops)), random_expr(rng, n, depth - 1, unary, binary, allow_div, allow_sqrt))
    if r < 0.45:
        k = int(rng.integers(-2 if allow_div else 0, 5))
        return Binary("pow", random_expr(rng, n, depth - 1, unary, binary, allow_div, allow_sqrt), Constant(float(k)))
    ops = list(binary) + (["div"] if allow_div else [])
    return Binary(
        str(rng.choice(ops)),
        random_expr(rng, n, depth - 1, unary, binary, allow_div, allow_sqrt),
        random_expr(rng, n, depth - 1, unary, binary, allow_div, allow_sqrt),
    )


def random_boxes(rng, k, n, scale=2.0):
    a = rng.uniform(-scale, scale, (k, n))
    b = rng.uniform(-scale, scale, (k, n))
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    thin = rng.random((k, n)) < 0.1
    hi = np.where(thin, lo, hi)
    return lo, hi


def points_in(rng, lo, hi):
    return lo + rng.random(lo.shape) * (hi - lo)


def random_endpoints(rng, k):
    """Interval endpoints over many magnitudes, including exact and huge values."""
    kind = rng.integers(0, 5, k)
    scale = np.choose(kind, [1.0, 10.0, 1e-3, 1e150, 1e6])
    a = rng.uniform(-1, 1, k) * scale
    b = rng.uniform(-1, 1, k) * scale
    ints = rng.random(k) < 0.15
    a = np.where(ints, np.round(a), a)
    b = np.where(ints, np.round(b), b)
    return np.minimum(a, b), np.maximum(a, b)
