"""Scalar real expressions over x1..xn: parsing, formatting, evaluation.

Grammar (lowest to highest binding)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom ('^' exponent)?
    exponent:= ['-' | '+'] INT ('^' exponent)? | '(' exponent ')'
    atom    := NUMBER | 'pi' | VAR | FUNC '(' expr (',' expr)* ')' | '(' expr ')'

Variables are ``x1..xn``; for n <= 3 the aliases ``x, y, z`` are accepted.
Functions: sin cos exp sqrt abs sqr (one argument), min max (two).
A minus sign directly in front of a number literal that is not raised to a
power folds into a negative constant.  Numeric literals denote the nearest
double.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import interval as iv
from .errors import ArityError, DomainError, EvalError, ExprSyntaxError
from .interval import Interval

UNARY_OPS = ("neg", "sin", "cos", "exp", "sqrt", "abs", "sqr")
BINARY_OPS = ("add", "sub", "mul", "div", "pow", "min", "max")
_FUNCS = {"sin": 1, "cos": 1, "exp": 1, "sqrt": 1, "abs": 1, "sqr": 1, "min": 2, "max": 2}
_ALIASES = {"x": 1, "y": 2, "z": 3}
_SYMBOL = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}


@dataclass(frozen=True)
class Constant:
    value: float
    symbol: str | None = None  # "pi" for the constant pi


@dataclass(frozen=True)
class Variable:
    index: int  # 1-based


@dataclass(frozen=True)
class Unary:
    op: str
    child: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Constant, Variable, Unary, Binary]


def arity(e: Expr) -> int:
    """Largest variable index referenced by ``e`` (0 for constant trees)."""
    if isinstance(e, Variable):
        return e.index
    if isinstance(e, Constant):
        return 0
    if isinstance(e, Unary):
        return arity(e.child)
    return max(arity(e.left), arity(e.right))


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    end = len(text)
    while pos < end:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos), text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return ExprSyntaxError(message, _byte_offset(self.text, tok[2]), self.text)

    def expect(self, value):
        tok = self.advance()
        if tok[1] != value or tok[0] == "end":
            raise self.error(f"expected {value!r}", tok)
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected token {self.peek()[1]!r}")
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = "add" if self.advance()[1] == "+" else "sub"
            left = Binary(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = "mul" if self.advance()[1] == "*" else "div"
            left = Binary(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.advance()
            nxt = self.peek()
            after = self.tokens[self.i + 1]
            if nxt[0] == "num" and after[1] != "^":
                self.advance()
                return Constant(-float(nxt[1]))
            return Unary("neg", self.unary())
        if tok[0] == "op" and tok[1] == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.advance()
            k = self.exponent()
            return Binary("pow", base, Constant(float(k)))
        return base

    def exponent(self) -> int:
        tok = self.peek()
        if tok[1] == "(":
            self.advance()
            k = self.exponent()
            self.expect(")")
        else:
            sign = 1
            if tok[1] in ("-", "+") and tok[0] == "op":
                sign = -1 if tok[1] == "-" else 1
                self.advance()
                tok = self.peek()
            if tok[0] != "num" or not re.fullmatch(r"\d+", tok[1]):
                raise self.error("exponent must be an integer literal", tok)
            self.advance()
            k = sign * int(tok[1])
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            caret = self.advance()
            inner = self.exponent()
            if inner < 0:
                raise self.error("exponent tower must stay integral", caret)
            k = k**inner
        return k

    def atom(self) -> Expr:
        tok = self.advance()
        kind, value = tok[0], tok[1]
        if kind == "num":
            return Constant(float(value))
        if kind == "op" and value == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "name":
            if value == "pi":
                return Constant(math.pi, "pi")
            if value in _FUNCS:
                self.expect("(")
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.advance()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != _FUNCS[value]:
                    raise self.error(f"{value} takes {_FUNCS[value]} argument(s)", tok)
                if len(args) == 1:
                    return Unary(value, args[0])
                return Binary(value, args[0], args[1])
            return self.variable(tok)
        raise self.error(f"unexpected token {value!r}" if kind != "end" else "unexpected end of input", tok)

    def variable(self, tok) -> Variable:
        name = tok[1]
        m = re.fullmatch(r"x(\d+)", name)
        if m:
            index = int(m.group(1))
            if index < 1:
                raise self.error(f"variable index must be >= 1 in {name!r}", tok)
        elif name in _ALIASES and self.n <= 3:
            index = _ALIASES[name]
        else:
            raise self.error(f"unknown name {name!r}", tok)
        if index > self.n:
            raise ArityError(f"variable {name!r} exceeds dimension n={self.n}")
        return Variable(index)


def parse(text: str, n: int) -> Expr:
    """Parse ``text`` into an expression over ``n`` variables."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return _Parser(text, n).parse()


def format(e: Expr) -> str:  # noqa: A001 - mirrors the operation name
    """Canonical fully parenthesized text; ``parse(format(e))`` rebuilds ``e``."""
    if isinstance(e, Constant):
        if e.symbol == "pi":
            return "pi"
        v = e.value
        text = str(int(v)) if v.is_integer() and abs(v) < 1e16 else repr(v)
        return f"({text})" if v < 0 or text.startswith("-") else text
    if isinstance(e, Variable):
        return f"x{e.index}"
    if isinstance(e, Unary):
        inner = format(e.child)
        if e.op == "neg":
            if isinstance(e.child, Constant) and e.child.symbol is None:
                inner = f"({inner})"
            return f"(-{inner})"
        return f"{e.op}({inner})"
    if e.op in ("min", "max"):
        return f"{e.op}({format(e.left)}, {format(e.right)})"
    if e.op == "pow":
        return f"({format(e.left)} ^ {int(e.right.value)})"
    return f"({format(e.left)} {_SYMBOL[e.op]} {format(e.right)})"


# ---------------------------------------------------------------------------
# pointwise evaluation
# ---------------------------------------------------------------------------


def eval_point(e: Expr, p: Sequence[float]) -> float:
    """Evaluate ``e`` at point ``p`` in IEEE double precision."""
    if len(p) < arity(e):
        raise ArityError(f"point has {len(p)} coordinates, expression needs {arity(e)}")
    try:
        v = _eval_point(e, p)
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        raise EvalError(str(exc)) from exc
    if math.isnan(v):
        raise EvalError("evaluation produced NaN")
    return v


def _eval_point(e, p):
    if isinstance(e, Constant):
        return e.value
    if isinstance(e, Variable):
        return float(p[e.index - 1])
    if isinstance(e, Unary):
        x = _eval_point(e.child, p)
        op = e.op
        if op == "neg":
            return -x
        if op == "sqr":
            return x * x
        if op == "abs":
            return abs(x)
        if op == "sqrt":
            if x < 0:
                raise ValueError(f"sqrt of negative value {x}")
            return math.sqrt(x)
        return getattr(math, op)(x)
    a = _eval_point(e.left, p)
    if e.op == "pow":
        k = int(e.right.value)
        if a == 0 and k < 0:
            raise ZeroDivisionError("0 raised to a negative power")
        return a**k
    b = _eval_point(e.right, p)
    op = e.op
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "min":
        return min(a, b)
    return max(a, b)


# ---------------------------------------------------------------------------
# natural interval extension
# ---------------------------------------------------------------------------


def eval_interval(e: Expr, box) -> Interval:
    """Enclose the range of ``e`` over ``box``.

    ``box`` is a :class:`fiberdiv.geometry.Box` or any sequence of
    :class:`Interval` / ``(lo, hi)`` pairs.  Domain violations raise
    :class:`DomainError`.
    """
    axes = _box_axes(box)
    if len(axes) < arity(e):
        raise ArityError(f"box has {len(axes)} axes, expression needs {arity(e)}")
    return _eval_interval(e, axes)


def _box_axes(box):
    if hasattr(box, "lo") and hasattr(box, "hi") and not isinstance(box, Interval):
        return [Interval(lo, hi) for lo, hi in zip(box.lo, box.hi)]
    return [a if isinstance(a, Interval) else Interval(*a) for a in box]


def _constant_interval(c: Constant) -> Interval:
    return iv.PI if c.symbol == "pi" else Interval(c.value)


def _eval_interval(e, axes):
    if isinstance(e, Constant):
        return _constant_interval(e)
    if isinstance(e, Variable):
        return axes[e.index - 1]
    if isinstance(e, Unary):
        return iv.interval_unary(e.op, _eval_interval(e.child, axes))
    a = _eval_interval(e.left, axes)
    if e.op == "pow":
        return iv.interval_binary("pow_int", a, Interval(e.right.value))
    return iv.interval_binary(e.op, a, _eval_interval(e.right, axes))


class BatchEnclosure:
    """Result of :func:`eval_interval_batch`.

    ``lo``/``hi`` are endpoint arrays; ``domain_errors`` counts boxes whose
    evaluation left the domain of some operation (those boxes get the whole
    real line); ``clamped`` counts boxes where sqrt was clipped at 0.
    """

    __slots__ = ("lo", "hi", "domain_errors", "clamped")

    def __init__(self, lo, hi, domain_errors, clamped):
        self.lo = lo
        self.hi = hi
        self.domain_errors = domain_errors
        self.clamped = clamped


def eval_interval_batch(e: Expr, lo: np.ndarray, hi: np.ndarray) -> BatchEnclosure:
    """Vectorized natural interval extension over ``k`` boxes.

    ``lo`` and ``hi`` have shape ``(k, n)``.  Produces the same endpoints as
    :func:`eval_interval` applied box by box; boxes that would raise
    :class:`DomainError` there are returned as ``[-inf, inf]`` and flagged.
    """
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    if lo.ndim != 2 or lo.shape != hi.shape:
        raise ValueError("lo/hi must be matching (k, n) arrays")
    if lo.shape[1] < arity(e):
        raise ArityError(f"boxes have {lo.shape[1]} axes, expression needs {arity(e)}")
    k = lo.shape[0]
    state = {"bad": np.zeros(k, dtype=bool), "clamped": np.zeros(k, dtype=bool)}
    rlo, rhi = _eval_batch(e, lo, hi, k, state)
    rlo = np.broadcast_to(rlo, (k,)).copy()
    rhi = np.broadcast_to(rhi, (k,)).copy()
    bad = state["bad"] | np.isnan(rlo) | np.isnan(rhi)
    rlo[bad] = -math.inf
    rhi[bad] = math.inf
    return BatchEnclosure(rlo, rhi, int(bad.sum()), int((state["clamped"] & ~bad).sum()))


def _eval_batch(e, lo, hi, k, state):
    if isinstance(e, Constant):
        c = _constant_interval(e)
        return np.full(k, c.lo), np.full(k, c.hi)
    if isinstance(e, Variable):
        return lo[:, e.index - 1], hi[:, e.index - 1]
    if isinstance(e, Unary):
        a_lo, a_hi = _eval_batch(e.child, lo, hi, k, state)
        if e.op == "sqrt":
            r_lo, r_hi, bad, clamped = iv.v_sqrt(a_lo, a_hi)
            state["bad"] |= bad
            state["clamped"] |= clamped
            return r_lo, r_hi
        return getattr(iv, f"v_{e.op}")(a_lo, a_hi)
    a_lo, a_hi = _eval_batch(e.left, lo, hi, k, state)
    if e.op == "pow":
        r_lo, r_hi, bad = iv.v_pow_int(a_lo, a_hi, int(e.right.value))
        state["bad"] |= bad
        return r_lo, r_hi
    b_lo, b_hi = _eval_batch(e.right, lo, hi, k, state)
    if e.op == "div":
        r_lo, r_hi, bad = iv.v_div(a_lo, a_hi, b_lo, b_hi)
        state["bad"] |= bad
        return r_lo, r_hi
    return getattr(iv, f"v_{e.op}")(a_lo, a_hi, b_lo, b_hi)
