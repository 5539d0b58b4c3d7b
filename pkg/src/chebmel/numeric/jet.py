"""Truncated Taylor arithmetic.

A :class:`Jet` carries the first ``K + 1`` Taylor coefficients of a function
at a base point.  Coefficients may be arrays, so a single jet can describe a
whole batch of expansion points at once; every operation broadcasts over the
trailing (batch) axes.

The module-level functions (:func:`sin`, :func:`cos`, :func:`exp`, ...) accept
plain floats, numpy arrays or jets, so user functions written with them are
"jet-evaluable" without any change::

    from chebmel.numeric import jet as jm
    f = lambda t: jm.sin(t) / (1 - 0.3 * t) ** 0.5
    jm.jet_lift(f, 1.0, 4).coeffs      # f, f', ..., f'''' at t = 1
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..errors import EvaluationError, UsageError


def _factorials(n: int) -> np.ndarray:
    return np.array([math.factorial(k) for k in range(n)], dtype=float)


def _integral_exponent(a) -> int | None:
    if isinstance(a, (int, np.integer)):
        return int(a)
    if isinstance(a, (float, np.floating)) and float(a).is_integer() and abs(a) < 2**31:
        return int(a)
    return None


class Jet:
    """Truncated Taylor polynomial ``sum_k tc[k] * (x - base)**k``.

    ``tc`` has shape ``(order + 1, *batch)``.  ``coeffs`` exposes the same data
    as derivative values ``f(t), f'(t), ..., f^(K)(t)``.
    """

    __slots__ = ("tc", "base")
    __array_ufunc__ = None  # make numpy defer to the reflected operators

    def __init__(self, tc, base=None):
        tc = np.asarray(tc, dtype=float)
        if tc.ndim == 0:
            tc = tc[None]
        self.tc = tc
        self.base = base

    # -- construction ---------------------------------------------------------
    @classmethod
    def variable(cls, t, order: int) -> "Jet":
        """The identity function expanded at ``t`` (scalar or array)."""
        if order < 0:
            raise UsageError("jet order must be nonnegative")
        t = np.asarray(t, dtype=float)
        tc = np.zeros((order + 1,) + t.shape)
        tc[0] = t
        if order >= 1:
            tc[1] = 1.0
        return cls(tc, base=t if t.ndim else float(t))

    @classmethod
    def constant(cls, c, order: int, base=None) -> "Jet":
        c = np.asarray(c, dtype=float)
        tc = np.zeros((order + 1,) + c.shape)
        tc[0] = c
        return cls(tc, base)

    @classmethod
    def from_derivatives(cls, derivs, base=None) -> "Jet":
        d = np.asarray(derivs, dtype=float)
        f = _factorials(d.shape[0]).reshape((-1,) + (1,) * (d.ndim - 1))
        return cls(d / f, base)

    # -- views ------------------------------------------------------------------
    @property
    def order(self) -> int:
        return self.tc.shape[0] - 1

    @property
    def value(self):
        v = self.tc[0]
        return float(v) if v.ndim == 0 else v

    @property
    def coeffs(self) -> np.ndarray:
        """Derivative values ``f^(k)(base)`` for ``k = 0..order``."""
        f = _factorials(self.order + 1).reshape((-1,) + (1,) * (self.tc.ndim - 1))
        return self.tc * f

    def derivative(self, k: int):
        v = self.tc[k] * math.factorial(k)
        return float(v) if np.ndim(v) == 0 else v

    def __repr__(self):
        return f"Jet(order={self.order}, base={self.base!r}, coeffs={self.coeffs!r})"

    # -- helpers ----------------------------------------------------------------
    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.order != self.order:
                raise UsageError(f"jet orders differ: {self.order} vs {other.order}")
            if (self.base is not None and other.base is not None and self.base is not other.base
                    and not np.array_equal(self.base, other.base)):
                raise UsageError("jets expanded at different base points")
            return other
        c = np.asarray(other, dtype=float)
        return Jet.constant(c, self.order, self.base)

    def _base_of(self, other):
        return self.base if self.base is not None else getattr(other, "base", None)

    def _like(self, tc, other=None) -> "Jet":
        return Jet(tc, self._base_of(other) if other is not None else self.base)

    # -- arithmetic -------------------------------------------------------------
    def __pos__(self):
        return self

    def __neg__(self):
        return self._like(-self.tc)

    def __add__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            shape = np.broadcast_shapes(self.tc.shape[1:], c.shape)
            tc = np.broadcast_to(self.tc, (self.order + 1,) + shape).copy()
            tc[0] = tc[0] + c
            return self._like(tc)
        o = self._coerce(other)
        return self._like(self.tc + o.tc, o)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -np.asarray(other, dtype=float))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            return self._like(self.tc * c)
        o = self._coerce(other)
        return self._like(_cauchy(self.tc, o.tc), o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            return self._like(self.tc / c)
        o = self._coerce(other)
        return self._like(_divide(self.tc, o.tc), o)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, a):
        return power(self, a)

    def __rpow__(self, c):
        return exp(self * math.log(c))


def _cauchy(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    K = u.shape[0]
    shape = np.broadcast_shapes(u.shape[1:], v.shape[1:])
    w = np.zeros((K,) + shape)
    for k in range(K):
        acc = u[0] * v[k]
        for j in range(1, k + 1):
            acc = acc + u[j] * v[k - j]
        w[k] = acc
    return w


def _divide(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    K = u.shape[0]
    shape = np.broadcast_shapes(u.shape[1:], v.shape[1:])
    w = np.zeros((K,) + shape)
    v0 = v[0]
    if np.any(v0 == 0):
        raise EvaluationError("jet division by a series with zero constant term")
    for k in range(K):
        acc = u[k]
        for j in range(1, k + 1):
            acc = acc - v[j] * w[k - j]
        w[k] = acc / v0
    return w


def _check_positive(x0, what):
    bad = np.asarray(x0) <= 0
    if np.any(bad):
        where = np.asarray(x0)[bad].ravel()[0] if np.ndim(x0) else x0
        raise EvaluationError(f"{what} requires a positive argument", point=float(where))


# -- elementary functions (float, array or Jet) ---------------------------------

def exp(x):
    if not isinstance(x, Jet):
        return np.exp(x)
    u = x.tc
    w = np.zeros_like(u)
    w[0] = np.exp(u[0])
    for k in range(1, u.shape[0]):
        acc = 0.0
        for j in range(1, k + 1):
            acc = acc + j * u[j] * w[k - j]
        w[k] = acc / k
    return x._like(w)


def log(x):
    if not isinstance(x, Jet):
        _check_positive(x, "log")
        return np.log(x)
    u = x.tc
    _check_positive(u[0], "log")
    w = np.zeros_like(u)
    w[0] = np.log(u[0])
    for k in range(1, u.shape[0]):
        acc = u[k]
        for j in range(1, k):
            acc = acc - j * w[j] * u[k - j] / k
        w[k] = acc / u[0]
    return x._like(w)


def _sincos(x: Jet):
    u = x.tc
    s = np.zeros_like(u)
    c = np.zeros_like(u)
    s[0], c[0] = np.sin(u[0]), np.cos(u[0])
    for k in range(1, u.shape[0]):
        a = 0.0
        b = 0.0
        for j in range(1, k + 1):
            a = a + j * u[j] * c[k - j]
            b = b + j * u[j] * s[k - j]
        s[k] = a / k
        c[k] = -b / k
    return x._like(s), x._like(c)


def sin(x):
    if not isinstance(x, Jet):
        return np.sin(x)
    return _sincos(x)[0]


def cos(x):
    if not isinstance(x, Jet):
        return np.cos(x)
    return _sincos(x)[1]


def power(x, a):
    """``x ** a``; integer exponents use repeated products, others need ``x > 0``."""
    n = _integral_exponent(a)
    if not isinstance(x, Jet):
        if n is None:
            _check_positive(x, f"power with exponent {a}")
            return np.power(x, float(a))
        if n < 0 and np.any(np.asarray(x) == 0):
            raise EvaluationError("negative power of zero", point=0.0)
        return np.power(np.asarray(x, dtype=float), n) if np.ndim(x) else float(x) ** n
    if n is not None:
        if n < 0:
            return 1.0 / power(x, -n)
        result = Jet.constant(np.ones(x.tc.shape[1:]), x.order, x.base)
        base = x
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result
    u = x.tc
    _check_positive(u[0], f"power with exponent {a}")
    a = float(a)
    w = np.zeros_like(u)
    w[0] = u[0] ** a
    for k in range(1, u.shape[0]):
        acc = 0.0
        for j in range(1, k + 1):
            acc = acc + ((a + 1.0) * j - k) * u[j] * w[k - j]
        w[k] = acc / (k * u[0])
    return x._like(w)


def sqrt(x):
    return power(x, 0.5)


def value(x):
    """Primal value of a float, array or jet."""
    return x.value if isinstance(x, Jet) else x


# -- lifting and composition ----------------------------------------------------

def jet_lift(f: Callable, t, order: int) -> Jet:
    """Jet of ``f`` at ``t``: values of ``f`` and its first ``order`` derivatives."""
    x = Jet.variable(t, order)
    r = f(x)
    if isinstance(r, Jet):
        return r
    r = np.asarray(r, dtype=float)
    shape = np.broadcast_shapes(r.shape, np.shape(t))
    return Jet.constant(np.broadcast_to(r, shape), order, x.base)


def compose_taylor(tc_outer: np.ndarray, u: Jet) -> Jet:
    """Evaluate ``sum_k tc_outer[k] * (u - u0)**k`` where ``u0`` is the value of ``u``."""
    delta = Jet(np.concatenate([np.zeros_like(u.tc[:1]), u.tc[1:]]), u.base)
    K = u.order
    r = Jet.constant(tc_outer[K], K, u.base)
    for k in range(K - 1, -1, -1):
        r = r * delta + tc_outer[k]
    return r


def derivative(f: Callable, n: int = 1) -> Callable:
    """Return the jet-evaluable ``n``-th derivative of ``f``."""
    if n < 0:
        raise UsageError("derivative order must be nonnegative")

    def df(x):
        if isinstance(x, Jet):
            K = x.order
            outer = jet_lift(f, x.tc[0], K + n).tc
            facts = np.array([math.factorial(k + n) / math.factorial(k) for k in range(K + 1)])
            tc = outer[n:] * facts.reshape((-1,) + (1,) * (outer.ndim - 1))
            return compose_taylor(tc, x)
        return jet_lift(f, x, n).derivative(n)

    df.__name__ = f"d{n}_{getattr(f, '__name__', 'f')}"
    return df


pi = math.pi
