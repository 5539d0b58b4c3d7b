"""Counting isolated zeros on an interval, and building combinations with prescribed zeros."""
from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import EvaluationError, ResolutionError, UsageError
from .numeric.interval import interval
from .numeric.jet import Jet
from .numeric.linalg import null_vector
from .wronskian import FunctionFamily

DEFAULT_RESOLUTION = 4096
DEFAULT_TOL = 1e-12
PLATEAU_REL = 1e-6      # |f| below this (relative to the scan scale) is a plateau candidate
ACCEPT_REL = 1e-10      # a plateau minimum this small counts as a zero
DERIV_REL = 1e-6        # Taylor term |c_k| L^k / S above this is "non-vanishing"
MAX_MULTIPLICITY = 4


@dataclass
class Zero:
    location: float
    multiplicity: int
    bracket: tuple
    residual: float
    confident: bool = True
    capped: bool = False

    @property
    def multiplicity_label(self) -> str:
        return f">={self.multiplicity}" if self.capped else str(self.multiplicity)


@dataclass
class ZeroReport:
    """Zeros found on ``interval``; residuals are ``|f(x)| / scale``."""

    zeros: list
    total_with_multiplicity: int
    scan_resolution: int
    interval: tuple = (0.0, 1.0)
    scale: float = 0.0
    identically_zero: bool = False
    notes: list = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.zeros)

    @property
    def locations(self) -> np.ndarray:
        return np.array([z.location for z in self.zeros])

    @property
    def all_simple(self) -> bool:
        return all(z.multiplicity == 1 and z.confident for z in self.zeros)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["zeros"] = [asdict(z) for z in self.zeros]
        d["interval"] = list(self.interval)
        for z in d["zeros"]:
            z["bracket"] = list(z["bracket"])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ZeroReport":
        d = dict(d)
        zs = [Zero(**dict(z, bracket=tuple(z["bracket"]))) for z in d.pop("zeros", [])]
        d["interval"] = tuple(d.get("interval", (0.0, 1.0)))
        return cls(zeros=zs, **d)


def _eval(f, x: np.ndarray) -> np.ndarray:
    v = np.asarray(f(x), dtype=float)
    v = np.broadcast_to(v, x.shape).copy()
    if not np.all(np.isfinite(v)):
        bad = x[~np.isfinite(v)][0]
        raise EvaluationError("function not finite during zero scan", point=float(bad))
    return v


def _scalar(f):
    return lambda x: float(np.asarray(f(np.array([x])), dtype=float)[0])


def multiplicity_probe(f: Callable, x: float, length: float, scale: float) -> tuple:
    """``(multiplicity, confident, capped)`` from the Taylor coefficients of ``f`` at ``x``.

    The multiplicity is the first ``k >= 1`` with ``|c_k| L^k / S`` above
    ``1e-6``, where ``L`` is the interval length and ``S`` the scan scale.
    """
    try:
        r = f(Jet.variable(np.array([x]), MAX_MULTIPLICITY))
    except (TypeError, AttributeError, ValueError):
        return 1, False, False
    if not isinstance(r, Jet):
        return 1, False, False
    tc = np.asarray(r.tc, dtype=float).reshape(MAX_MULTIPLICITY + 1, -1)[:, 0]
    for k in range(1, MAX_MULTIPLICITY + 1):
        if abs(tc[k]) * length ** k / scale > DERIV_REL:
            return k, True, False
    return MAX_MULTIPLICITY, False, True


def count_zeros(f: Callable, E, resolution: int = DEFAULT_RESOLUTION,
                tol: float = DEFAULT_TOL) -> ZeroReport:
    """Scan ``f`` on ``resolution`` points of ``E`` and locate every zero.

    Sign changes are refined by Brent's method to width ``tol``.  Local
    minima of ``|f|`` below ``1e-6`` of the scan scale without a sign change
    are minimized and accepted as (even-order) zeros when the minimum is below
    ``1e-10`` of the scale.  ``f`` must accept numpy arrays; if it also accepts
    jets, multiplicities come from its Taylor coefficients.
    """
    if resolution < 64:
        raise UsageError("resolution must be at least 64")
    if isinstance(E, (tuple, list)):
        E = interval(*E)
    x = E.grid(resolution)
    v = _eval(f, x)
    S = float(np.max(np.abs(v)))
    lo, hi = float(x[0]), float(x[-1])
    report = ZeroReport([], 0, resolution, (lo, hi), S)
    if S == 0:
        report.identically_zero = True
        report.notes.append("function vanishes at every scan point")
        return report
    L = hi - lo
    fs = _scalar(f)
    sgn = np.sign(v)
    cands = []          # (kind, i)
    for i in range(resolution):
        if sgn[i] == 0:
            cands.append(("exact", i))
    for i in range(resolution - 1):
        if sgn[i] * sgn[i + 1] < 0:
            cands.append(("change", i))
    a = np.abs(v)
    for i in range(1, resolution - 1):
        if (a[i] <= PLATEAU_REL * S and a[i] < a[i - 1] and a[i] <= a[i + 1]
                and sgn[i - 1] == sgn[i] == sgn[i + 1] and sgn[i] != 0):
            cands.append(("plateau", i))
    if len(cands) > resolution // 8:
        raise ResolutionError(f"{len(cands)} zero candidates at resolution {resolution}; "
                              "refine the scan")
    cands.sort(key=lambda c: (c[1], c[0]))
    for kind, i in cands:
        if kind == "exact":
            loc, br = float(x[i]), (float(x[i]), float(x[i]))
        elif kind == "change":
            br = (float(x[i]), float(x[i + 1]))
            loc = brentq(fs, br[0], br[1], xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)
        else:
            br = (float(x[i - 1]), float(x[i + 1]))
            res = minimize_scalar(lambda s: abs(fs(s)), bounds=br, method="bounded",
                                  options={"xatol": tol})
            loc = float(res.x)
            if abs(fs(loc)) > ACCEPT_REL * S:
                report.notes.append(f"near-zero minimum at {loc:.17g} not accepted "
                                    f"(|f|/S = {abs(fs(loc)) / S:.3g})")
                continue
        if report.zeros and abs(loc - report.zeros[-1].location) <= 4 * tol:
            continue
        mult, confident, capped = multiplicity_probe(f, loc, L, S)
        odd_expected = kind == "change"
        if kind != "exact" and (mult % 2 == 1) != odd_expected and not capped:
            confident = False
            mult += 1
        report.zeros.append(Zero(float(loc), int(mult), br, abs(fs(loc)) / S, confident, capped))
    report.zeros.sort(key=lambda z: z.location)
    report.total_with_multiplicity = sum(z.multiplicity for z in report.zeros)
    return report


# -- realizing prescribed zeros ------------------------------------------------------

def _basis_values(fam, t: np.ndarray) -> np.ndarray:
    if isinstance(fam, FunctionFamily):
        return fam.values(t)
    return np.asarray(fam(t), dtype=float)


def realize_zeros(fam, targets: Sequence[float]) -> np.ndarray:
    """Coefficients of a combination vanishing at ``targets``.

    ``fam`` is a :class:`FunctionFamily` or a basis evaluator returning
    ``(n, *shape)`` arrays; ``len(targets)`` must be ``n - 1``.  The vector
    spans the null space of the evaluation matrix (unit norm, largest entry
    positive).
    """
    t = np.asarray(targets, dtype=float)
    if t.ndim != 1 or np.any(np.diff(t) <= 0):
        raise UsageError("targets must be strictly increasing")
    V = _basis_values(fam, t)                     # (n, k)
    n = V.shape[0]
    if t.size != n - 1:
        raise UsageError(f"need {n - 1} targets for a basis of size {n}, got {t.size}")
    if isinstance(fam, FunctionFamily):
        for p in t:
            if p not in fam.domain:
                raise UsageError(f"target {p} outside the family domain")
    return null_vector(V.T)


def combination(fam, coeffs) -> Callable:
    """``sum_j c_j f_j`` as a function accepting arrays and jets."""
    c = np.asarray(coeffs, dtype=float)
    if isinstance(fam, FunctionFamily):
        if c.size != len(fam):
            raise UsageError("coefficient count differs from family size")

        def f(t):
            if fam.batch is not None:
                r = fam.batch(t)
            else:
                r = [g(t) for g in fam.members]
                if any(isinstance(x, Jet) for x in r):
                    return sum(ci * g for ci, g in zip(c, r))
                r = np.stack([np.broadcast_to(np.asarray(x, float), np.shape(t)) for x in r])
            return _contract(c, r)
        return f

    def g(t):
        return _contract(c, fam(t))
    return g


def _contract(c, r):
    if isinstance(r, Jet):
        return Jet(np.tensordot(c, np.moveaxis(r.tc, 1, 0), axes=1), r.base)
    return np.tensordot(c, np.asarray(r, dtype=float), axes=1)


class CachedBasis:
    """Basis evaluator ``t -> (n, *shape)`` that remembers its values on scan grids.

    Random-coefficient experiments evaluate the same basis on the same scan
    grid once per draw; only the few refinement calls per draw miss the cache.
    Jets are always passed through.
    """

    def __init__(self, fn: Callable, n: int, cache_size: int = 4):
        self.fn = fn
        self.n = n
        self.cache_size = cache_size
        self._cache: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def __call__(self, t):
        if isinstance(t, Jet):
            return self.fn(t)
        t = np.asarray(t, dtype=float)
        if t.size < 64:
            return self.fn(t)
        key = (t.shape, t.tobytes())
        with self._lock:
            hit = self._cache.get(key)
            if hit is not None:
                self._cache.move_to_end(key)
                return hit
        v = np.asarray(self.fn(t), dtype=float)
        v.setflags(write=False)
        with self._lock:
            self._cache[key] = v
            while len(self._cache) > self.cache_size:
                self._cache.popitem(last=False)
        return v
