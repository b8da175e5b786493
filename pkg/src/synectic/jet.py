"""Second-order forward-mode differentiation of scalar functions.

A `Jet2Scalar` holds the value, gradient and Hessian of a scalar with respect to
``m`` active coordinates. Arithmetic on jets applies the chain and product
rules exactly, so derivatives carry no truncation error.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence, Union

import numpy as np

Number = Union[int, float]


class DomainError(ArithmeticError):
    """A function was evaluated outside its domain.

    ``expr`` names the offending subexpression when known; ``point`` holds the
    coordinate values at which evaluation failed.
    """

    def __init__(self, reason: str, expr: str | None = None, point=None):
        self.reason = reason
        self.expr = expr
        self.point = None if point is None else tuple(float(v) for v in point)
        super().__init__(self._message())

    def _message(self) -> str:
        msg = self.reason
        if self.expr is not None:
            msg += f" in '{self.expr}'"
        if self.point is not None:
            coords = ", ".join(f"x{i + 1}={v!r}" for i, v in enumerate(self.point))
            msg += f" at ({coords})"
        return msg

    def at(self, point) -> "DomainError":
        return DomainError(self.reason, self.expr, point)


def _ro(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class Jet2Scalar:
    """Value, gradient and Hessian of a scalar at a point."""

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value: float, grad, hess):
        self.value = float(value)
        self.grad = _ro(np.array(grad, dtype=np.float64))
        self.hess = _ro(np.array(hess, dtype=np.float64))

    @classmethod
    def _raw(cls, value: float, grad: np.ndarray, hess: np.ndarray) -> "Jet2Scalar":
        # internal fast path; arrays are fresh and owned by the new jet
        obj = cls.__new__(cls)
        obj.value = value
        grad.setflags(write=False)
        hess.setflags(write=False)
        obj.grad = grad
        obj.hess = hess
        if not math.isfinite(value):
            raise DomainError("non-finite value")
        return obj

    @classmethod
    def constant(cls, c: float, m: int) -> "Jet2Scalar":
        return cls._raw(float(c), np.zeros(m), np.zeros((m, m)))

    @classmethod
    def variable(cls, x: float, i: int, m: int) -> "Jet2Scalar":
        g = np.zeros(m)
        g[i] = 1.0
        return cls._raw(float(x), g, np.zeros((m, m)))

    @property
    def m(self) -> int:
        return self.grad.shape[0]

    def __repr__(self) -> str:
        return f"Jet2Scalar(value={self.value!r}, grad={self.grad.tolist()}, hess={self.hess.tolist()})"

    def _coerce(self, other) -> "Jet2Scalar":
        if isinstance(other, Jet2Scalar):
            return other
        return Jet2Scalar.constant(float(other), self.m)

    def __add__(self, other) -> "Jet2Scalar":
        o = self._coerce(other)
        return Jet2Scalar._raw(self.value + o.value, self.grad + o.grad, self.hess + o.hess)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet2Scalar":
        o = self._coerce(other)
        return Jet2Scalar._raw(self.value - o.value, self.grad - o.grad, self.hess - o.hess)

    def __rsub__(self, other) -> "Jet2Scalar":
        return self._coerce(other) - self

    def __neg__(self) -> "Jet2Scalar":
        return Jet2Scalar._raw(-self.value, -self.grad, -self.hess)

    def __pos__(self) -> "Jet2Scalar":
        return self

    def __mul__(self, other) -> "Jet2Scalar":
        o = self._coerce(other)
        a, b = self, o
        outer = np.outer(a.grad, b.grad)
        return Jet2Scalar._raw(
            a.value * b.value,
            a.grad * b.value + a.value * b.grad,
            a.hess * b.value + (outer + outer.T) + a.value * b.hess,
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet2Scalar":
        o = self._coerce(other)
        if o.value == 0.0:
            raise DomainError("division by zero")
        q = self.value / o.value
        gq = (self.grad - q * o.grad) / o.value
        outer = np.outer(gq, o.grad)
        hq = (self.hess - (outer + outer.T) - q * o.hess) / o.value
        return Jet2Scalar._raw(q, gq, hq)

    def __rtruediv__(self, other) -> "Jet2Scalar":
        return self._coerce(other) / self

    def __pow__(self, other) -> "Jet2Scalar":
        if isinstance(other, int) or (
            isinstance(other, float) and other.is_integer() and abs(other) <= 1024
        ):
            return ipow(self, int(other))
        return pow_general(self, self._coerce(other))

    def __rpow__(self, other) -> "Jet2Scalar":
        return pow_general(self._coerce(other), self)

    def _chain(self, f0: float, f1: float, f2: float) -> "Jet2Scalar":
        return Jet2Scalar._raw(
            f0, f1 * self.grad, f1 * self.hess + f2 * np.outer(self.grad, self.grad)
        )


def ipow(a: Jet2Scalar, k: int) -> Jet2Scalar:
    """Integer power by repeated multiplication (binary exponentiation)."""
    if k == 0:
        return Jet2Scalar.constant(1.0, a.m)
    if k < 0:
        return 1.0 / ipow(a, -k)
    result = None
    base = a
    while k:
        if k & 1:
            result = base if result is None else result * base
        k >>= 1
        if k:
            base = base * base
    return result


def pow_general(a: Jet2Scalar, b: Jet2Scalar) -> Jet2Scalar:
    """``a ** b`` for a positive base, via ``exp(b log a)``."""
    if a.value <= 0.0:
        raise DomainError("non-integer power of a nonpositive base")
    return exp(b * log(a))


def _lift(fn_name: str):
    def decorate(rule):
        def apply(a):
            if not isinstance(a, Jet2Scalar):
                return getattr(math, fn_name)(a)
            return rule(a)

        apply.__name__ = fn_name
        apply.__doc__ = f"Jet-aware {fn_name}; plain numbers pass through to math.{fn_name}."
        return apply

    return decorate


@_lift("sin")
def sin(a: Jet2Scalar) -> Jet2Scalar:
    s, c = math.sin(a.value), math.cos(a.value)
    return a._chain(s, c, -s)


@_lift("cos")
def cos(a: Jet2Scalar) -> Jet2Scalar:
    s, c = math.sin(a.value), math.cos(a.value)
    return a._chain(c, -s, -c)


@_lift("tan")
def tan(a: Jet2Scalar) -> Jet2Scalar:
    if math.cos(a.value) == 0.0:
        raise DomainError("tan at a pole")
    t = math.tan(a.value)
    sec2 = 1.0 + t * t
    return a._chain(t, sec2, 2.0 * t * sec2)


@_lift("exp")
def exp(a: Jet2Scalar) -> Jet2Scalar:
    try:
        e = math.exp(a.value)
    except OverflowError:
        raise DomainError("non-finite value") from None
    return a._chain(e, e, e)


@_lift("log")
def log(a: Jet2Scalar) -> Jet2Scalar:
    v = a.value
    if v <= 0.0:
        raise DomainError("log of a nonpositive value")
    return a._chain(math.log(v), 1.0 / v, -1.0 / (v * v))


@_lift("sqrt")
def sqrt(a: Jet2Scalar) -> Jet2Scalar:
    v = a.value
    if v <= 0.0:
        # derivative is unbounded at 0, so 0 is excluded as well
        raise DomainError("sqrt of a nonpositive value")
    r = math.sqrt(v)
    return a._chain(r, 0.5 / r, -0.25 / (r * v))


ScalarFunction = Callable[[Sequence[Jet2Scalar]], Union[Jet2Scalar, Number]]


def jet2_eval(f, x) -> Jet2Scalar:
    """Value, gradient and Hessian of ``f`` at ``x``.

    ``f`` is either a parsed expression (see :mod:`synectic.dsl`) or a Python
    callable taking the list of coordinate jets and combining them with jet
    arithmetic and the functions in this module. Domain errors are re-raised
    with the coordinates of ``x`` attached.
    """
    from synectic import dsl

    xs = np.asarray(x, dtype=np.float64).reshape(-1)
    if isinstance(f, dsl.Expr):
        return dsl.eval_jet2(f, xs)
    m = xs.shape[0]
    variables = [Jet2Scalar.variable(v, i, m) for i, v in enumerate(xs)]
    try:
        out = f(variables)
    except DomainError as err:
        raise err.at(xs) from None
    except (ZeroDivisionError, ValueError, OverflowError) as err:
        raise DomainError(str(err), point=xs) from None
    if not isinstance(out, Jet2Scalar):
        out = Jet2Scalar.constant(float(out), m)
    return out
