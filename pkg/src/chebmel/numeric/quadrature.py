"""Adaptive Gauss-Kronrod quadrature on intervals and boxes.

Integrands take an array of nodes of shape ``(n,)`` and return an array whose
leading axis has length ``n``.  Any trailing axes are integrated componentwise,
which is how parameter grids, jets in a parameter and nested (product)
integrals are all handled by one adaptive loop.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import ConvergenceError, EvaluationError, UsageError
from .interval import Interval, as_pieces
from .jet import Jet

DEFAULT_TOL = 1e-10
MAX_SUBDIVISIONS = 2**15

_XK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
W_KRONROD = np.concatenate([_WK[:-1], _WK[::-1]])
W_GAUSS = np.zeros(15)
W_GAUSS[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])
W_DIFF = W_KRONROD - W_GAUSS

ROUNDOFF = 50 * np.finfo(float).eps

# depth of the initial geometric partition toward a flagged endpoint
_GEOMETRIC_LEVELS = 24


@dataclass
class QuadratureResult:
    value: float | np.ndarray
    error_estimate: float | np.ndarray
    subdivisions: int

    def __post_init__(self):
        if np.any(np.asarray(self.error_estimate) < 0):
            raise ValueError("error estimate must be nonnegative")


def _initial_breaks(iv: Interval) -> list[float]:
    lo, hi = iv.lo, iv.hi
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise UsageError("quadrature needs a finite interval")
    L = hi - lo
    pts = {lo, hi}
    if iv.singular_lo and iv.singular_hi:
        mid = 0.5 * (lo + hi)
        pts.add(mid)
        for k in range(2, _GEOMETRIC_LEVELS + 2):
            pts.add(lo + L * 2.0**-k)
            pts.add(hi - L * 2.0**-k)
    elif iv.singular_lo:
        for k in range(1, _GEOMETRIC_LEVELS + 1):
            pts.add(lo + L * 2.0**-k)
    elif iv.singular_hi:
        for k in range(1, _GEOMETRIC_LEVELS + 1):
            pts.add(hi - L * 2.0**-k)
    else:
        # a few panels keep the first error estimate honest for wiggly integrands
        pts.update(np.linspace(lo, hi, 5)[1:-1].tolist())
    return sorted(pts)


def _eval_panels(f: Callable, a: np.ndarray, b: np.ndarray):
    """Apply K15/G7 on each panel [a_i, b_i]; returns values, error estimates and
    the K15 integral of ``|f|`` (the roundoff scale)."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = (c[:, None] + h[:, None] * NODES[None, :]).ravel()
    y = np.asarray(f(x), dtype=float)
    if y.ndim == 0 or y.shape[0] != x.shape[0]:
        y = np.broadcast_to(y, (x.shape[0],) + y.shape[1:] if y.ndim else (x.shape[0],))
    if not np.all(np.isfinite(y)):
        bad = x[np.nonzero(~np.isfinite(y.reshape(x.shape[0], -1)).any(axis=1))[0][0]]
        raise EvaluationError("integrand is not finite", point=float(bad))
    y = y.reshape((a.shape[0], 15) + y.shape[1:])
    hh = h.reshape((-1,) + (1,) * (y.ndim - 2))
    val = hh * np.tensordot(W_KRONROD, y, axes=([0], [1]))
    diff = np.abs(hh * np.tensordot(W_DIFF, y, axes=([0], [1])))
    ah = np.abs(hh)
    absval = ah * np.tensordot(W_KRONROD, np.abs(y), axes=([0], [1]))
    # QUADPACK's estimate: scale |K - G| by int |f - mean| to the power 3/2
    mean = val / (2.0 * hh)
    asc = ah * np.tensordot(W_KRONROD, np.abs(y - mean[:, None]), axes=([0], [1]))
    with np.errstate(divide="ignore", invalid="ignore"):
        est = np.where(asc > 0, asc * np.minimum(1.0, (200.0 * diff / asc) ** 1.5), diff)
    return val, est, absval


def integrate(f: Callable, E, tol: float = DEFAULT_TOL,
              max_subdivisions: int = MAX_SUBDIVISIONS) -> QuadratureResult:
    """Adaptive K15/G7 quadrature of ``f`` over an interval (or a union of them).

    The loop stops once, for every output component ``c``,
    ``sum(err_c) <= max(tol * max(1, |value_c|), 50 eps int |f_c|)``; the second
    term is the roundoff floor for components that cancel to (near) zero.
    """
    pieces = as_pieces(E)
    breaks: list[tuple[float, float]] = []
    for iv in pieces:
        pts = _initial_breaks(iv)
        breaks.extend(zip(pts[:-1], pts[1:]))
    a = np.array([p[0] for p in breaks])
    b = np.array([p[1] for p in breaks])
    val, err, absval = _eval_panels(f, a, b)
    total = val.sum(axis=0)
    total_err = err.sum(axis=0)
    total_abs = absval.sum(axis=0)
    weight = np.maximum(1.0, np.abs(total))

    def prio(e):
        return float(np.max(e / weight)) if np.ndim(e) else float(e / weight)

    heap = [(-prio(err[i]), a[i], b[i], i) for i in range(len(a))]
    heapq.heapify(heap)
    store = {i: (val[i], err[i], absval[i]) for i in range(len(a))}
    next_id = len(a)
    n_sub = len(a)

    while True:
        thr = np.maximum(tol * np.maximum(1.0, np.abs(total)), ROUNDOFF * total_abs)
        if np.all(total_err <= thr):
            break
        if n_sub >= max_subdivisions:
            _, wa, wb, _ = heap[0]
            raise ConvergenceError(
                f"quadrature did not converge after {n_sub} subintervals "
                f"(error {np.max(total_err):.3g}); worst subinterval ({wa:.17g}, {wb:.17g})",
                worst=(float(wa), float(wb)))
        # bisect a batch of the worst panels at once
        top = -heap[0][0]
        batch = []
        while heap and len(batch) < 64 and -heap[0][0] >= 0.25 * top:
            batch.append(heapq.heappop(heap))
        aa, bb = [], []
        for _, pa, pb, pid in batch:
            v, e, av = store.pop(pid)
            total = total - v
            total_err = total_err - e
            total_abs = total_abs - av
            m = 0.5 * (pa + pb)
            if not (pa < m < pb):
                raise ConvergenceError(
                    "quadrature subinterval shrank below floating-point resolution",
                    worst=(float(pa), float(pb)))
            aa += [pa, m]
            bb += [m, pb]
        aa = np.array(aa)
        bb = np.array(bb)
        v2, e2, a2 = _eval_panels(f, aa, bb)
        for i in range(len(aa)):
            store[next_id] = (v2[i], e2[i], a2[i])
            heapq.heappush(heap, (-prio(e2[i]), aa[i], bb[i], next_id))
            next_id += 1
        total = total + v2.sum(axis=0)
        total_err = total_err + e2.sum(axis=0)
        total_abs = total_abs + a2.sum(axis=0)
        n_sub += len(batch)
        if n_sub % 1024 < len(batch):
            # resum to avoid drift from the running updates
            vals = [s[0] for s in store.values()]
            errs = [s[1] for s in store.values()]
            total = np.sum(vals, axis=0)
            total_err = np.sum(errs, axis=0)
            total_abs = np.sum([s[2] for s in store.values()], axis=0)

    vals = np.array([s[0] for s in store.values()])
    errs = np.array([s[1] for s in store.values()])
    total = vals.sum(axis=0)
    total_err = np.abs(errs).sum(axis=0)
    if np.ndim(total) == 0:
        total, total_err = float(total), float(total_err)
    return QuadratureResult(total, total_err, n_sub)


def integrate_param(F: Callable, E, y, tol: float = DEFAULT_TOL) -> QuadratureResult:
    """Integrate ``F(t, y)`` over ``t`` for a float, array or jet parameter ``y``.

    Array parameters are integrated in one vectorized pass (one adaptive mesh
    shared by all components).  For a jet parameter the value is a :class:`Jet`
    in ``y`` whose coefficients are the integrals of the integrand's
    coefficients, i.e. differentiation under the integral sign.
    """
    if isinstance(y, Jet):
        K = y.order
        B = y.tc.shape[1:]
        yb = Jet(y.tc.reshape((K + 1, 1) + B), None)

        def g(t):
            r = F(t.reshape((-1,) + (1,) * len(B)), yb)
            tc = r.tc if isinstance(r, Jet) else Jet.constant(np.asarray(r, float), K).tc
            tc = np.broadcast_to(tc, (K + 1, t.shape[0]) + B)
            return np.moveaxis(tc, 1, 0)

        res = integrate(g, E, tol)
        return QuadratureResult(Jet(res.value, y.base), res.error_estimate, res.subdivisions)
    ya = np.asarray(y, dtype=float)
    B = ya.shape
    yb = ya.reshape((1,) + B)

    def h(t):
        r = F(t.reshape((-1,) + (1,) * len(B)), yb)
        return np.broadcast_to(np.asarray(r, float), (t.shape[0],) + B)

    return integrate(h, E, tol)


def integrate_product(f: Callable, Es: Sequence, tol: float = DEFAULT_TOL) -> QuadratureResult:
    """Integrate ``f(t_0, ..., t_{d-1})`` over a box ``Es[0] x ... x Es[d-1]``.

    Nested adaptive quadrature: each axis is integrated by :func:`integrate`
    with a vector integrand indexed by the outer nodes, so every axis adapts
    on its own.  The error budget is split evenly, ``tol / d`` per axis.
    ``f`` receives flat arrays of equal length.
    """
    d = len(Es)
    if not 1 <= d <= 4:
        raise UsageError("product quadrature supports 1 to 4 axes")
    per_axis = tol / d
    count = [0]

    def level(k: int, outer: tuple):
        # outer: tuple of k flat arrays of equal length P; returns shape (P,)
        P = outer[0].shape[0] if outer else 1

        def g(t):
            n = t.shape[0]
            args = tuple(np.tile(o, n) for o in outer) + (np.repeat(t, P),)
            if k == d - 1:
                vals = np.broadcast_to(np.asarray(f(*args), float), (n * P,))
            else:
                vals = level(k + 1, args)[0]
            return vals.reshape(n, P)

        res = integrate(g, Es[k], per_axis)
        count[0] += res.subdivisions
        return np.asarray(res.value).reshape(P), res.error_estimate

    value, err = level(0, ())
    return QuadratureResult(float(value[0]), float(np.max(err)), count[0])


def integrate_weighted(weights: Callable, kernel: Callable, E, y,
                       tol: float = DEFAULT_TOL) -> QuadratureResult:
    """Integrals ``int_E w_j(t) K(t, y) dt`` for all weights at once.

    ``weights(t)`` returns shape ``(nw, n)`` for nodes ``t`` of shape ``(n,)``;
    ``kernel(t, y)`` is evaluated with ``t`` reshaped to broadcast against
    ``y``.  The value has shape ``(nw, *shape(y))``, or is a :class:`Jet` with
    that batch shape when ``y`` is a jet.  Sharing one adaptive mesh across
    all weights and parameter values is what makes basis evaluation on long
    parameter grids cheap.
    """
    if isinstance(y, Jet):
        K = y.order
        B = y.tc.shape[1:]
        yb = Jet(y.tc.reshape((K + 1, 1) + B), None)

        def g(t):
            n = t.shape[0]
            w = np.asarray(weights(t), dtype=float)            # (nw, n)
            k = kernel(t.reshape((-1,) + (1,) * len(B)), yb)
            tc = k.tc if isinstance(k, Jet) else Jet.constant(np.asarray(k, float), K).tc
            tc = np.broadcast_to(tc, (K + 1, n) + B)
            prod = w.reshape((1,) + w.shape + (1,) * len(B)) * tc[:, None]   # (K+1, nw, n, *B)
            return np.moveaxis(prod, 2, 0)

        res = integrate(g, E, tol)
        return QuadratureResult(Jet(res.value, y.base), res.error_estimate, res.subdivisions)
    ya = np.asarray(y, dtype=float)
    B = ya.shape
    yb = ya.reshape((1,) + B)

    def h(t):
        n = t.shape[0]
        w = np.asarray(weights(t), dtype=float)
        k = np.broadcast_to(np.asarray(kernel(t.reshape((-1,) + (1,) * len(B)), yb), float),
                            (n,) + B)
        prod = w.reshape(w.shape + (1,) * len(B)) * k[None]         # (nw, n, *B)
        return np.moveaxis(prod, 1, 0)

    return integrate(h, E, tol)
