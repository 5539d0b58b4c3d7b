"""First-order Melnikov functions of perturbed centers and their zero counts.

Three concrete systems are covered, each through an explicit model type:

* :class:`System9Model`  - homogeneous perturbation of a uniform isochronous
  center, ``M1`` written with the ``C^E_{2k}`` integrals on ``(0, pi)``;
* :class:`System11Model` - polynomial perturbation of a center with lines of
  singular points, ``M1`` by quadrature of the polar integrand;
* :class:`PiecewiseRadialModel` - piecewise perturbation of ``-y(1-ax), x(1-ax)``
  on angular sectors, with the reduction to the ``B2`` span.

Every system also has a :class:`MelnikovEquationSpec` encoding so its value
can be cross-checked against the generic sector-wise formula.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import qr

from .errors import (DegenerateSystemError, ModelError, SpanMembershipError, UsageError)
from .families import chebpoly_expand, cs_alpha_many, cs_trig_many, t_polynomial
from .numeric import jet as jm
from .numeric.interval import Interval, interval
from .numeric.jet import Jet
from .numeric.quadrature import DEFAULT_TOL, integrate, integrate_weighted
from .zeros import CachedBasis, ZeroReport, combination, count_zeros, realize_zeros

PI = math.pi
FIRST_INTEGRAL_TOL = 1e-8
FIT_TOL = 1e-6
Y_NEAR = 1e-3       # reduced grids use |y| in [1 + Y_NEAR, Y_FAR]
Y_FAR = 50.0
EDGE = 1e-3         # relative trim of rho windows for zero scans
ANGLE_EPS = 1e-12
ZERO_COLUMN = 1e-12  # sampled generators this small (relative) are identically zero


# -- helpers --------------------------------------------------------------------

def _rows(vals, j):
    if isinstance(vals, Jet):
        return Jet(vals.tc[:, j], vals.base)
    return vals[j]


def _stack(rows):
    if any(isinstance(r, Jet) for r in rows):
        base = next(r.base for r in rows if isinstance(r, Jet))
        K = next(r.order for r in rows if isinstance(r, Jet))
        tcs = [r.tc if isinstance(r, Jet) else Jet.constant(r, K).tc for r in rows]
        shape = np.broadcast_shapes(*(t.shape for t in tcs))
        return Jet(np.stack([np.broadcast_to(t, shape) for t in tcs], axis=1), base)
    shape = np.broadcast_shapes(*(np.shape(r) for r in rows))
    return np.stack([np.broadcast_to(np.asarray(r, dtype=float), shape) for r in rows])


def _scaled(vals, powers, x):
    """Row ``j`` of ``vals`` times ``x**powers[j]``."""
    return _stack([_rows(vals, j) * jm.power(x, p) if p else _rows(vals, j)
                   for j, p in enumerate(powers)])


def _as_float(r):
    if isinstance(r, Jet):
        return r
    r = np.asarray(r, dtype=float)
    return float(r) if r.ndim == 0 else r


def _values(x):
    return np.atleast_1d(np.asarray(jm.value(x), dtype=float))


def run_trials(fn: Callable, n: int, jobs: int = 1) -> list:
    """``[fn(0), ..., fn(n-1)]``, optionally on a thread pool; order is by index."""
    if jobs <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, range(n)))


# -- the generic sector-wise formula -----------------------------------------------

@dataclass(frozen=True)
class MelnikovEquationSpec:
    """``dx/dt = -H_t/H_x + eps L(t, x)`` with ``L = L_i`` on ``[sigma_i, sigma_{i+1})``.

    ``H(t, x)`` must accept a jet in ``x``; ``x0(t, rho)`` is the unperturbed
    solution through ``rho`` at ``t = -pi``.
    """

    H: Callable
    sector_bounds: tuple
    L: tuple
    x0: Callable
    rho_range: tuple = (0.0, math.inf)
    name: str = ""

    def __post_init__(self):
        sb = tuple(float(s) for s in self.sector_bounds)
        object.__setattr__(self, "sector_bounds", sb)
        object.__setattr__(self, "L", tuple(self.L))
        if len(sb) < 2 or abs(sb[0] + PI) > ANGLE_EPS or abs(sb[-1] - PI) > ANGLE_EPS:
            raise UsageError("sector bounds must run from -pi to pi")
        if np.any(np.diff(sb) <= 0):
            raise UsageError("sector bounds must be strictly increasing")
        if len(self.L) != len(sb) - 1:
            raise UsageError(f"{len(sb) - 1} sectors need as many perturbations, got {len(self.L)}")

    def first_integral_defect(self, rho, samples: int = 65) -> float:
        """Largest relative spread of ``H(t, x0(t, rho))`` over ``t``."""
        r = np.atleast_1d(np.asarray(rho, dtype=float))
        t = np.linspace(-PI, PI, samples).reshape((-1,) + (1,) * r.ndim)
        h = np.asarray(self.H(t, self.x0(t, r)), dtype=float)
        spread = h.max(axis=0) - h.min(axis=0)
        return float(np.max(spread / np.maximum(1.0, np.abs(h).max(axis=0))))


def m1_general(spec: MelnikovEquationSpec, rho, tol: float = DEFAULT_TOL):
    """``sum_i int_{sigma_i}^{sigma_{i+1}} H_x L_i`` along ``x0(., rho)``."""
    r = np.asarray(rho, dtype=float)
    lo, hi = spec.rho_range
    if np.any(r <= lo) or np.any(r >= hi):
        raise UsageError(f"rho outside the annulus parameter range ({lo}, {hi})")
    defect = spec.first_integral_defect(r)
    if defect > FIRST_INTEGRAL_TOL:
        raise ModelError(f"H is not conserved along x0 (relative spread {defect:.3g})")
    B = r.shape
    total = np.zeros(B)
    for (a, b), L in zip(zip(spec.sector_bounds[:-1], spec.sector_bounds[1:]), spec.L):
        def f(t, L=L):
            tt = t.reshape((-1,) + (1,) * len(B))
            x = np.broadcast_to(np.asarray(spec.x0(tt, r), dtype=float), (t.size,) + B)
            hx = spec.H(tt, Jet.variable(x, 1)).tc[1]
            return np.broadcast_to(hx * np.asarray(L(tt, x), dtype=float), (t.size,) + B)
        total = total + integrate(f, interval(a, b, lo_open=False, hi_open=False), tol).value
    return _as_float(total)


# -- system (9) ---------------------------------------------------------------------

@dataclass(frozen=True)
class System9Model:
    """Degree-``2m`` homogeneous perturbation, given by ``lambda_hat_0..lambda_hat_m``."""

    m: int
    lambda_hat: tuple

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise UsageError("m must be a positive integer")
        lh = tuple(float(v) for v in self.lambda_hat)
        if len(lh) != self.m + 1:
            raise UsageError(f"need m + 1 = {self.m + 1} coefficients, got {len(lh)}")
        object.__setattr__(self, "lambda_hat", lh)

    @property
    def domain(self) -> Interval:
        return interval(0.0, 1.0)

    def lambdas(self) -> np.ndarray:
        """Coefficients of ``cos^{2j}`` equal to ``sum_k lambda_hat_k cos(2k t)``."""
        lam = np.zeros(self.m + 1)
        for k, c in enumerate(self.lambda_hat):
            for i, b in enumerate(chebpoly_expand(2 * k)):
                if i % 2 == 0:
                    lam[i // 2] += c * b
        return lam


def _check_unit(rho):
    v = _values(rho)
    if np.any(v <= 0) or np.any(v >= 1):
        raise UsageError("rho must lie in (0, 1)")


def system9_basis(m: int, tol: float = DEFAULT_TOL) -> Callable:
    """``rho -> [2 rho' C^E_{2k}(rho')]_{k=0..m}`` with ``rho' = rho^(2m-1)``, ``E = (0, pi)``."""
    E = interval(0.0, PI)
    xi = lambda t: np.sin(t) ** 2
    ks = [2 * k for k in range(m + 1)]

    def basis(rho):
        _check_unit(rho)
        y = jm.power(rho, 2 * m - 1) if isinstance(rho, Jet) else np.asarray(rho, float) ** (2 * m - 1)
        C = cs_trig_many(E, ks, "cos", y, 1.0, 1, xi, tol)
        return _stack([_rows(C, j) * y * 2.0 for j in range(m + 1)])
    return basis


def m1_system9(model: System9Model, rho, path: str = "reduced", tol: float = DEFAULT_TOL):
    """``M1`` of system (9).

    ``reduced`` sums ``2 rho' lambda_hat_k C^E_{2k}(rho')``; ``direct`` integrates
    ``rho' (sum lambda_j cos^{2j}) sin^2 / (1 - rho' cos)`` over ``(-pi, pi)``;
    ``original`` uses the form before ``t -> pi/2 - t`` (``sin`` in the denominator).
    """
    m = model.m
    if path == "reduced":
        return _as_float(_contract(np.array(model.lambda_hat), system9_basis(m, tol)(rho)))
    _check_unit(rho)
    lam = model.lambdas()
    full = interval(-PI, PI, lo_open=False, hi_open=False)
    y = jm.power(rho, 2 * m - 1) if isinstance(rho, Jet) else np.asarray(rho, float) ** (2 * m - 1)
    if path == "direct":
        def w(t):
            c = np.cos(t)
            return (sum(l * c ** (2 * j) for j, l in enumerate(lam)) * np.sin(t) ** 2)[None]
        kern = lambda t, yy: 1.0 / (1.0 - yy * np.cos(t))
    elif path == "original":
        def w(t):
            s = np.sin(t)
            return (sum(l * s ** (2 * j) for j, l in enumerate(lam)) * np.cos(t) ** 2)[None]
        kern = lambda t, yy: 1.0 / (1.0 - yy * np.sin(t))
    else:
        raise UsageError(f"unknown path {path!r}; use direct, reduced or original")
    v = integrate_weighted(w, kern, full, y, tol).value
    return _as_float(_rows(v, 0) * y)


def _contract(c, vals):
    c = np.asarray(c, dtype=float)
    if isinstance(vals, Jet):
        return Jet(np.tensordot(c, np.moveaxis(vals.tc, 1, 0), axes=1), vals.base)
    return np.tensordot(c, np.asarray(vals, dtype=float), axes=1)


def system9_perturbation(model: System9Model) -> tuple:
    """``(P, Q)`` homogeneous of degree ``2m`` realizing ``model``: ``P = 0`` and
    ``Q(x, y) = sum_j lambda_j y^{2j} (x^2 + y^2)^{m-j}``."""
    lam, m = model.lambdas(), model.m
    P = lambda x, y: 0.0 * x
    Q = lambda x, y: sum(l * y ** (2 * j) * (x * x + y * y) ** (m - j) for j, l in enumerate(lam))
    return P, Q


def system9_equation(m: int, P: Callable, Q: Callable) -> MelnikovEquationSpec:
    """The polar equation of system (9) in the generic form."""
    k = 2 * m - 1

    def H(t, r):
        return np.sin(t) + jm.power(r, 1 - 2 * m)

    def L(t, r):
        c, s = np.cos(t), np.sin(t)
        p, q = P(c, s), Q(c, s)
        return (p * c + q * s) * r ** (2 * m) - (q * c - p * s) * c * r ** (4 * m - 1) / k

    def x0(t, rho):
        return rho * (1.0 - rho ** k * np.sin(t)) ** (-1.0 / k)

    return MelnikovEquationSpec(H, (-PI, PI), (L,), x0, (0.0, 1.0), f"system9 m={m}")


# -- system (11) --------------------------------------------------------------------

def _poly_table(tab, m: int, what: str) -> np.ndarray:
    T = np.zeros((m + 1, m + 1))
    if tab is None:
        return T
    A = np.asarray(tab, dtype=float)
    if A.ndim != 2:
        raise UsageError(f"{what} must be a 2-d coefficient table")
    for i in range(A.shape[0]):
        for j in range(A.shape[1]):
            if A[i, j] != 0:
                if i + j > m:
                    raise UsageError(f"{what}[{i}][{j}] exceeds degree {m}")
                T[i, j] = A[i, j]
    return T


def monomials(m: int) -> list:
    """Exponent pairs ``(i, j)`` with ``i + j <= m``, graded order."""
    return [(i, d - i) for d in range(m + 1) for i in range(d, -1, -1)]


@dataclass(frozen=True)
class System11Model:
    """Perturbation ``(P_m, Q_m)`` of ``prod(x - a_i) prod(y - b_j) (-y, x)``.

    ``P[i][j]`` is the coefficient of ``x^i y^j``.
    """

    a_list: tuple
    b_list: tuple
    m: int
    P: np.ndarray = field(default=None, compare=False)
    Q: np.ndarray = field(default=None, compare=False)

    def __post_init__(self):
        a = tuple(float(v) for v in self.a_list)
        b = tuple(float(v) for v in self.b_list)
        if not a and not b:
            raise UsageError("at least one line of singular points is required")
        for name, vals in (("a", a), ("b", b)):
            if any(v == 0 for v in vals):
                raise UsageError(f"{name} values must be nonzero")
            if len(set(vals)) != len(vals):
                raise UsageError(f"{name} values must be pairwise distinct")
        if int(self.m) != self.m or self.m < 0:
            raise UsageError("m must be a nonnegative integer")
        object.__setattr__(self, "a_list", a)
        object.__setattr__(self, "b_list", b)
        object.__setattr__(self, "P", _poly_table(self.P, self.m, "P"))
        object.__setattr__(self, "Q", _poly_table(self.Q, self.m, "Q"))

    @property
    def radius(self) -> float:
        return min(abs(v) for v in self.a_list + self.b_list)

    @property
    def domain(self) -> Interval:
        return interval(0.0, self.radius)

    def coefficients(self) -> np.ndarray:
        """``P`` then ``Q`` entries in :func:`monomials` order."""
        mons = monomials(self.m)
        return np.array([self.P[i, j] for i, j in mons] + [self.Q[i, j] for i, j in mons])

    def with_coefficients(self, c) -> "System11Model":
        mons = monomials(self.m)
        c = np.asarray(c, dtype=float)
        P, Q = np.zeros((self.m + 1,) * 2), np.zeros((self.m + 1,) * 2)
        for k, (i, j) in enumerate(mons):
            P[i, j], Q[i, j] = c[k], c[k + len(mons)]
        return System11Model(self.a_list, self.b_list, self.m, P, Q)


def system11_basis(a_list, b_list, m: int, tol: float = DEFAULT_TOL) -> Callable:
    """``rho -> (2 N, *shape)``: ``M1`` for each unit monomial of ``P`` then ``Q``."""
    a_arr = np.asarray(a_list, dtype=float)
    b_arr = np.asarray(b_list, dtype=float)
    radius = min(np.abs(np.concatenate([a_arr, b_arr])))
    mons = monomials(m)
    E = interval(-PI, PI, lo_open=False, hi_open=False)

    def weights(t):
        c, s = np.cos(t), np.sin(t)
        base = [c ** i * s ** j for i, j in mons]
        return np.stack([w * c for w in base] + [w * s for w in base])

    def kernel(t, r):
        c, s = np.cos(t), np.sin(t)
        den = 1.0
        for a in a_arr:
            den = den * (r * c - a)
        for b in b_arr:
            den = den * (r * s - b)
        return 1.0 / den

    powers = [i + j for i, j in mons] * 2

    def basis(rho):
        v = _values(rho)
        if np.any(v <= 0) or np.any(v >= radius):
            raise ModelError(f"rho must lie in (0, {radius}); the denominator vanishes beyond")
        vals = integrate_weighted(weights, kernel, E, rho, tol).value
        return _scaled(vals, powers, rho)
    return basis


def m1_system11(model: System11Model, rho, tol: float = DEFAULT_TOL):
    """``int (P cos + Q sin)(rho cos, rho sin) / (prod(rho cos - a_i) prod(rho sin - b_j))``."""
    basis = system11_basis(model.a_list, model.b_list, model.m, tol)
    return _as_float(_contract(model.coefficients(), basis(rho)))


def _distinct(vals, rel: float = 1e-12) -> list:
    out: list = []
    for v in sorted(vals):
        if not out or abs(v - out[-1]) > rel * max(1.0, abs(v)):
            out.append(v)
    return out


def system11_sets(model: System11Model) -> tuple:
    """``(A, D, l)``: distinct ``|a_i|, |b_j|``; distinct ``a_i^2 + b_j^2``; ``Card(D)``."""
    A = _distinct([abs(v) for v in model.a_list + model.b_list])
    D = _distinct([a * a + b * b for a in model.a_list for b in model.b_list])
    return A, D, len(D)


def bound_system11(model: System11Model) -> int:
    """``Card(A) ([m/2] + l + 1) + [(m-1)/2] + l``."""
    A, _, l = system11_sets(model)
    m = model.m
    return len(A) * (m // 2 + l + 1) + (m - 1) // 2 + l


def coarse_bound_system11(model: System11Model) -> int:
    """``(n1 + n2) ([m/2] + n1 n2 + 1) + [(m-1)/2] + n1 n2``."""
    n1, n2, m = len(model.a_list), len(model.b_list), model.m
    return (n1 + n2) * (m // 2 + n1 * n2 + 1) + (m - 1) // 2 + n1 * n2


def system11_window(model: System11Model) -> tuple:
    return (EDGE * model.radius, (1 - EDGE) * model.radius)


# -- system (10): piecewise perturbation on radial sectors ------------------------------

def index_sets(m: int) -> tuple:
    """``(B1, B2)``: exponent pairs ``(i, p)`` of the cosine and sine generators."""
    B1 = [(0, p) for p in range(1, (m + 1) // 2 + 1)]
    B1 += [(i, p) for i in range(1, m + 2) for p in range((m - i + 1) // 2 + 1)]
    B2 = [(i, p) for i in range(m + 1) for p in range((m - i) // 2 + 1)]
    return B1, B2


def sector_pieces(radials: Sequence[float]) -> list:
    """``E_s = (r_s, r_{s+1})`` and the wrapping ``E_n = (r_n, pi) U (-pi, r_0)``."""
    r = [float(v) for v in radials]
    out = [[interval(r[s], r[s + 1])] for s in range(len(r) - 1)]
    last = [interval(r[-1], PI)]
    if r[0] > -PI + ANGLE_EPS:
        last.append(interval(-PI, r[0]))
    out.append(last)
    return out


def split_pieces(pieces: list, breaks: Sequence[float]) -> list:
    """Cut the pieces of one sector at interior angles (sector additivity checks)."""
    out = list(pieces)
    for b in breaks:
        nxt = []
        for p in out:
            if p.lo < b < p.hi:
                nxt.extend(p.split(b))
            else:
                nxt.append(p)
        out = nxt
    return out


@dataclass(frozen=True)
class PiecewiseRadialModel:
    """System (10) with sectors cut by ``radials`` and coefficient vector ``mu``.

    ``mu`` is laid out sector by sector; inside a sector the ``c^s_{i,i+2p-1}``
    for ``(i, p)`` in ``B1`` come first, then ``d^s_{i,i+2p}`` for ``B2``
    (see :func:`mu_labels`).
    """

    m: int
    a: float
    radials: tuple
    mu: np.ndarray = field(default=None, compare=False)

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 0:
            raise UsageError("m must be a nonnegative integer")
        if self.a == 0:
            raise UsageError("a must be nonzero")
        r = tuple(float(v) for v in self.radials)
        if len(r) < 2:
            raise UsageError("at least two radials are required")
        if np.any(np.diff(r) <= 0) or r[0] < -PI - ANGLE_EPS or r[-1] >= PI:
            raise UsageError("radials must increase inside [-pi, pi)")
        object.__setattr__(self, "radials", r)
        size = mu_size(self.m, len(r) - 1)
        mu = np.zeros(size) if self.mu is None else np.asarray(self.mu, dtype=float).ravel()
        if mu.size != size:
            raise UsageError(f"mu needs {size} entries, got {mu.size}")
        object.__setattr__(self, "mu", mu)

    @property
    def n(self) -> int:
        return len(self.radials) - 1

    @property
    def domain(self) -> Interval:
        return interval(0.0, 1.0 / abs(self.a))

    def sectors(self) -> list:
        return sector_pieces(self.radials)

    def with_mu(self, mu) -> "PiecewiseRadialModel":
        return PiecewiseRadialModel(self.m, self.a, self.radials, mu)


def mu_size(m: int, n: int) -> int:
    B1, B2 = index_sets(m)
    return (n + 1) * (len(B1) + len(B2))


def mu_labels(m: int, n: int) -> list:
    """``(s, kind, i, p)`` for every entry of ``mu``; ``kind`` is ``c`` or ``d``."""
    B1, B2 = index_sets(m)
    out = []
    for s in range(n + 1):
        out += [(s, "c", i, p) for i, p in B1]
        out += [(s, "d", i, p) for i, p in B2]
    return out


def system10_basis(m: int, a: float, radials, tol: float = DEFAULT_TOL,
                   breaks: Sequence[float] = ()) -> Callable:
    """``rho -> (len(mu), *shape)``: ``M1`` for each unit entry of ``mu``."""
    B1, B2 = index_sets(m)
    secs = [split_pieces(p, breaks) for p in sector_pieces(radials)]
    cpow = [i for i, _ in B1] + [i for i, _ in B2]
    has_sin = np.array([False] * len(B1) + [True] * len(B2))[:, None]
    kk = np.array(cpow, dtype=float)[:, None]
    powers = [i + 2 * p - 1 for i, p in B1] + [i + 2 * p for i, p in B2]
    radius = 1.0 / abs(a)

    def weights(t):
        return np.cos(t)[None] ** kk * np.where(has_sin, np.sin(t)[None], 1.0)

    def kernel(t, r):
        return 1.0 / (1.0 - a * r * np.cos(t))

    def basis(rho):
        v = _values(rho)
        if np.any(v <= 0) or np.any(v >= radius):
            raise UsageError(f"rho must lie in (0, {radius})")
        rows = []
        for pieces in secs:
            vals = integrate_weighted(weights, kernel, pieces, rho, tol).value
            sv = _scaled(vals, powers, rho)
            rows += [_rows(sv, j) for j in range(len(powers))]
        return _stack(rows)
    return basis


def m1_system10(model: PiecewiseRadialModel, rho, tol: float = DEFAULT_TOL,
                breaks: Sequence[float] = ()):
    """Sector sum of the ``B1`` cosine integrals and the ``B2`` sine integrals."""
    basis = system10_basis(model.m, model.a, model.radials, tol, breaks)
    return _as_float(_contract(model.mu, basis(rho)))


def system10_perturbations(model: PiecewiseRadialModel) -> list:
    """Per-sector ``(P_s, Q_s)`` polynomials reproducing the ``mu`` coordinates.

    ``c^s_{i,i+2p-1}`` comes from ``P = x^{i-1} (x^2+y^2)^p`` (``i >= 1``) or from
    ``P = x (x^2+y^2)^{p-1}, Q = y (x^2+y^2)^{p-1}`` (``i = 0``); ``d^s_{i,i+2p}``
    comes from ``Q = x^i (x^2+y^2)^p``.
    """
    labels = mu_labels(model.m, model.n)
    terms: list = [[] for _ in range(model.n + 1)]
    for (s, kind, i, p), c in zip(labels, model.mu):
        if c != 0:
            terms[s].append((kind, i, p, float(c)))

    def make(ts):
        def P(x, y):
            out = 0.0 * x
            for kind, i, p, c in ts:
                if kind == "c":
                    out = out + (c * x * (x * x + y * y) ** (p - 1) if i == 0
                                 else c * x ** (i - 1) * (x * x + y * y) ** p)
            return out

        def Q(x, y):
            out = 0.0 * y
            for kind, i, p, c in ts:
                if kind == "c" and i == 0:
                    out = out + c * y * (x * x + y * y) ** (p - 1)
                elif kind == "d":
                    out = out + c * x ** i * (x * x + y * y) ** p
            return out
        return P, Q
    return [make(ts) for ts in terms]


def system10_equation(model: PiecewiseRadialModel) -> MelnikovEquationSpec:
    """The polar equation of system (10) in the generic sector-wise form."""
    secs = model.sectors()
    pq = system10_perturbations(model)
    bounds = sorted({-PI, PI, *model.radials})
    a = model.a
    Ls = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        mid = 0.5 * (lo + hi)
        s = next(k for k, ps in enumerate(secs) if any(p.lo < mid < p.hi for p in ps))
        P, Q = pq[s]

        def L(t, r, P=P, Q=Q):
            c, sn = np.cos(t), np.sin(t)
            return (P(r * c, r * sn) * c + Q(r * c, r * sn) * sn) / (1.0 - a * r * c)
        Ls.append(L)
    return MelnikovEquationSpec(lambda t, r: r + 0.0 * t, tuple(bounds), tuple(Ls),
                                lambda t, rho: rho + 0.0 * t, (0.0, 1.0 / abs(a)),
                                f"system10 m={model.m}")


# -- reduction to the B2 span -----------------------------------------------------------

def _b2_sizes(m: int) -> tuple:
    return (m + 1) // 2 + 1, m // 2 + 1


def b2_basis(m: int, sectors: list, tol: float = DEFAULT_TOL) -> Callable:
    """``y -> [1, y, .., y^{m-1}, (C^{E_s}_{m+1-2p,1})_p, (S^{E_s}_{m-2p,1})_p per sector]``."""
    nc, ns = _b2_sizes(m)
    ks = [m + 1 - 2 * p for p in range(nc)] + [m - 2 * p for p in range(ns)]
    which = ["cos"] * nc + ["sin"] * ns

    def basis(y):
        rows = [jm.power(y, i) if i else 1.0 + 0.0 * y for i in range(m)]
        for pieces in sectors:
            v = cs_alpha_many(pieces, ks, which, 1.0, y, tol=tol)
            rows += [_rows(v, j) for j in range(len(ks))]
        return _stack(rows)
    return basis


def b2_labels(m: int, n_sectors: int) -> list:
    nc, ns = _b2_sizes(m)
    out = [f"y^{i}" for i in range(m)]
    for s in range(n_sectors):
        out += [f"C[{s}]_{m + 1 - 2 * p},1" for p in range(nc)]
        out += [f"S[{s}]_{m - 2 * p},1" for p in range(ns)]
    return out


def reduced_grid(a: float, size: int) -> np.ndarray:
    return math.copysign(1.0, a) * np.geomspace(1.0 + Y_NEAR, Y_FAR, size)


def reduced_m1(model: PiecewiseRadialModel, y, tol: float = DEFAULT_TOL):
    """``M1_hat(y) = y^{m-1} M1(1 / (a y))``."""
    rho = 1.0 / (model.a * y)
    v = m1_system10(model, rho, tol)
    return v * jm.power(y, model.m - 1) if model.m != 1 else v


@dataclass
class ReducedCoefficients:
    """Coordinates of ``M1_hat`` in the ``B2`` generators, with the fit residual."""

    zeta: np.ndarray
    eta: list
    lambda_: list
    residual: float
    m: int = 1
    a: float = 1.0
    sectors: list = field(default_factory=list, repr=False)
    scale: float = 0.0

    def vector(self) -> np.ndarray:
        parts = [np.asarray(self.zeta, float)]
        for e, l in zip(self.eta, self.lambda_):
            parts += [np.asarray(e, float), np.asarray(l, float)]
        return np.concatenate(parts)

    def evaluate(self, y, tol: float = DEFAULT_TOL):
        return _as_float(_contract(self.vector(), b2_basis(self.m, self.sectors, tol)(y)))

    def to_dict(self) -> dict:
        return {"zeta": list(map(float, self.zeta)),
                "eta": [list(map(float, e)) for e in self.eta],
                "lambda": [list(map(float, l)) for l in self.lambda_],
                "residual": float(self.residual), "m": self.m, "a": float(self.a),
                "scale": float(self.scale)}


def _split_vector(v, m: int, n_sectors: int) -> tuple:
    nc, ns = _b2_sizes(m)
    zeta = np.asarray(v[:m], float)
    eta, lam = [], []
    k = m
    for _ in range(n_sectors):
        eta.append(np.asarray(v[k:k + nc], float))
        lam.append(np.asarray(v[k + nc:k + nc + ns], float))
        k += nc + ns
    return zeta, eta, lam


def fit_columns(A: np.ndarray, b: np.ndarray) -> tuple:
    """Least squares ``A x ~ b`` with column equilibration; zero columns get ``x = 0``.

    Returns ``(x, residual)`` with the residual relative to ``max |b|``.
    """
    norms = np.max(np.abs(A), axis=0)
    live = norms > ZERO_COLUMN * norms.max(initial=0.0)
    x = np.zeros(A.shape[1])
    scale = float(np.max(np.abs(b))) if b.size else 0.0
    if scale == 0 or not np.any(live):
        return x, 0.0 if scale == 0 else 1.0
    sol, *_ = np.linalg.lstsq(A[:, live] / norms[live], b, rcond=1e-13)
    x[live] = sol / norms[live]
    return x, float(np.max(np.abs(A @ x - b)) / scale)


def reduce_to_B2(model: PiecewiseRadialModel, grid=None, tol: float = FIT_TOL,
                 quad_tol: float = DEFAULT_TOL) -> ReducedCoefficients:
    """Least-squares coordinates of ``M1_hat`` in the ``B2`` generators on a ``y`` grid.

    The residual certifies membership of ``M1_hat`` in ``B2``; it is an error
    for it to exceed ``tol`` (relative to the largest sampled value).
    """
    secs = model.sectors()
    m = model.m
    dim = len(b2_labels(m, len(secs)))
    y = reduced_grid(model.a, max(3 * dim, 120)) if grid is None else np.asarray(grid, float)
    if y.ndim != 1 or y.size < 3 * dim:
        raise UsageError(f"reduction grid needs at least {3 * dim} points")
    if np.any(np.abs(y) <= 1) or np.any(np.sign(y) != math.copysign(1.0, model.a)):
        raise UsageError("reduction grid must lie in (1, inf) for a > 0 and (-inf, -1) for a < 0")
    data = np.asarray(reduced_m1(model, y, quad_tol), float)
    A = np.asarray(b2_basis(m, secs, quad_tol)(y), float).T
    x, res = fit_columns(A, data)
    if res > tol:
        raise SpanMembershipError(f"M1_hat is not in the B2 span on the grid (residual {res:.3g})",
                                  residual=res)
    zeta, eta, lam = _split_vector(x, m, len(secs))
    return ReducedCoefficients(zeta, eta, lam, res, m, model.a, secs,
                               float(np.max(np.abs(data))) if data.size else 0.0)


def mth_derivative_reduced(coeffs: ReducedCoefficients, y, tol: float = DEFAULT_TOL):
    """``(-1)^m m! sum_s (sum eta C^{E_s}_{m+1-2p,m+1} + sum lambda S^{E_s}_{m-2p,m+1})``."""
    m = coeffs.m
    if np.any(np.abs(_values(y)) <= 1):
        raise UsageError("|y| must exceed 1")
    nc, ns = _b2_sizes(m)
    ks = [m + 1 - 2 * p for p in range(nc)] + [m - 2 * p for p in range(ns)]
    which = ["cos"] * nc + ["sin"] * ns
    total = 0.0
    for pieces, e, l in zip(coeffs.sectors, coeffs.eta, coeffs.lambda_):
        c = np.concatenate([e, l])
        if not np.any(c):
            continue
        total = total + _contract(c, cs_alpha_many(pieces, ks, which, m + 1.0, y, tol=tol))
    return _as_float((-1) ** m * math.factorial(m) * total + 0.0 * jm.value(y))


def cos_power_coefficients(k: int) -> np.ndarray:
    """``b`` with ``cos(t)^k = sum_j b[j] cos(j t)``."""
    b = np.zeros(k + 1)
    for r in range(k + 1):
        b[abs(k - 2 * r)] += math.comb(k, r) / 2.0 ** k
    return b


def sin_cos_power_coefficients(k: int) -> np.ndarray:
    """``d`` with ``sin(t) cos(t)^k = sum_l d[l] sin(l t)``."""
    b = cos_power_coefficients(k)
    d = np.zeros(k + 2)
    for j, c in enumerate(b):
        d[j + 1] += c / 2
        if j >= 2:
            d[j - 1] -= c / 2
        elif j == 0:
            d[1] += c / 2
    return d


def eq32_coefficients(coeffs: ReducedCoefficients) -> tuple:
    """``(eta_hat, lambda_hat)`` per sector: coordinates of ``y^{m+1} M1_hat^{(m)}`` on the
    ``C^{E_s}_{m+1-2p}(1/y)``, ``S^{E_s}_{m+1-2p}(1/y)`` integrals (``xi = 1``, ``alpha = m+1``).

    Obtained by expanding ``cos^k`` into multiple angles, so the map is explicit.
    """
    m = coeffs.m
    nc, ns = _b2_sizes(m)
    f = (-1) ** m * math.factorial(m)
    eh, lh = [], []
    for e, l in zip(coeffs.eta, coeffs.lambda_):
        ehat = np.zeros(nc)
        for p in range(nc):
            b = cos_power_coefficients(m + 1 - 2 * p)
            for q in range(nc):
                j = m + 1 - 2 * q
                if j < b.size:
                    ehat[q] += f * e[p] * b[j]
        lhat = np.zeros(ns)
        for p in range(ns):
            d = sin_cos_power_coefficients(m - 2 * p)
            for q in range(ns):
                j = m + 1 - 2 * q
                if j < d.size:
                    lhat[q] += f * l[p] * d[j]
        eh.append(ehat)
        lh.append(lhat)
    return eh, lh


def eq32_sides(coeffs: ReducedCoefficients, y, tol: float = DEFAULT_TOL) -> tuple:
    """``(y^{m+1} M1_hat^{(m)}(y), trigonometric-integral combination at 1/y)``."""
    m = coeffs.m
    y = np.asarray(y, float)
    lhs = y ** (m + 1) * np.asarray(mth_derivative_reduced(coeffs, y, tol), float)
    eh, lh = eq32_coefficients(coeffs)
    nc, ns = _b2_sizes(m)
    ks = [m + 1 - 2 * p for p in range(nc)] + [m + 1 - 2 * p for p in range(ns)]
    which = ["cos"] * nc + ["sin"] * ns
    rhs = np.zeros_like(y)
    for pieces, e, l in zip(coeffs.sectors, eh, lh):
        v = cs_trig_many(pieces, ks, which, 1.0 / y, m + 1.0, 1, None, tol)
        rhs = rhs + _contract(np.concatenate([e, l]), v)
    return _as_float(lhs), _as_float(rhs)


# -- polynomial reductions of the generators -----------------------------------------------

def lemma_2_9_sides(E, kappa: int, k: int, l: int, y, tol: float = DEFAULT_TOL) -> tuple:
    """Both sides of ``y^l I(k) = I(k + l) + y^l T_{kappa,k-1} - T_{kappa,k+l-1}``,
    ``I(j) = int_E sin^kappa cos^j / (y - cos)``."""
    if k < 0 or k + l < 0:
        raise UsageError("need k >= 0 and k + l >= 0")
    which = "sin" if kappa == 1 else "cos"
    v = cs_alpha_many(E, [k, k + l], which, 1.0, y, tol=tol)
    yv = np.asarray(y, float)
    lhs = yv ** l * v[0]
    rhs = v[1] + yv ** l * t_polynomial(E, kappa, k - 1, yv) - t_polynomial(E, kappa, k + l - 1, yv)
    return _as_float(lhs), _as_float(rhs)


def b1_generator_identities(m: int, E, y, tol: float = DEFAULT_TOL) -> list:
    """Each ``B1`` generator rewritten as a ``B2`` integral plus a polynomial.

    Returns ``(label, lhs, rhs)`` triples covering the ``i = 0`` cosine
    generators, the ``i >= 1`` cosine generators and the sine generators.
    """
    B1, B2 = index_sets(m)
    out = []
    for i, p in B1:
        lhs, rhs = lemma_2_9_sides(E, 0, i, m - (i + 2 * p - 1), y, tol)
        out.append((f"y^{m - (i + 2 * p - 1)} C_{i},1", lhs, rhs))
    for i, p in B2:
        lhs, rhs = lemma_2_9_sides(E, 1, i, m - (i + 2 * p), y, tol)
        out.append((f"y^{m - (i + 2 * p)} S_{i},1", lhs, rhs))
    return out


def derivative_identity_sides(E, k: int, alpha: float, l: int, y, which: str = "cos",
                              tol: float = DEFAULT_TOL) -> tuple:
    """``l``-th ``y``-derivative of ``C^E_{k,alpha}`` by jets vs ``(-1)^l (alpha)_l C^E_{k,alpha+l}``."""
    lhs = cs_alpha_many(E, [k], which, alpha, Jet.variable(float(y), l), tol=tol)
    lhs = float(np.ravel(lhs.coeffs[l])[0])
    poch = math.prod(alpha + i for i in range(l))
    rhs = (-1) ** l * poch * float(np.ravel(cs_alpha_many(E, [k], which, alpha + l, y, tol=tol))[0])
    return lhs, rhs


def b1_basis(m: int, sectors: list, tol: float = DEFAULT_TOL) -> Callable:
    """``y -> B1`` generators: ``y^{m-(i+2p-1)} C^{E_s}_{i,1}`` and ``y^{m-(i+2p)} S^{E_s}_{i,1}``."""
    B1, B2 = index_sets(m)
    ks = [i for i, _ in B1] + [i for i, _ in B2]
    which = ["cos"] * len(B1) + ["sin"] * len(B2)
    powers = [m - (i + 2 * p - 1) for i, p in B1] + [m - (i + 2 * p) for i, p in B2]

    def basis(y):
        rows = []
        for pieces in sectors:
            v = _scaled(cs_alpha_many(pieces, ks, which, 1.0, y, tol=tol), powers, y)
            rows += [_rows(v, j) for j in range(len(ks))]
        return _stack(rows)
    return basis


def prop61_generators(m: int, a: float) -> tuple:
    """``(V0, V1)`` generator lists, each a function of ``g = [[rho, theta], ...]``."""
    B1, B2 = index_sets(m)

    def gen(f):
        return lambda g: f(g[:, 0], g[:, 1]) / (1.0 - a * g[:, 0] * np.cos(g[:, 1]))
    V0 = []
    for j in range(m + 1):
        for i in range(j + 1):
            V0.append(gen(lambda r, t, i=i, j=j: r ** j * np.cos(t) ** (i + 1) * np.sin(t) ** (j - i)))
            V0.append(gen(lambda r, t, i=i, j=j: r ** j * np.cos(t) ** i * np.sin(t) ** (j + 1 - i)))
    V1 = [gen(lambda r, t, i=i, p=p: r ** (i + 2 * p - 1) * np.cos(t) ** i) for i, p in B1]
    V1 += [gen(lambda r, t, i=i, p=p: r ** (i + 2 * p) * np.sin(t) * np.cos(t) ** i) for i, p in B2]
    return V0, V1


# -- Proposition 8 --------------------------------------------------------------------

PROP8_CASES = ("i", "ii", "iii", "iv", "v", "vi")
PROP8_RADIALS = {
    "i": (-PI / 2, PI / 2),
    "ii": (0.0, PI / 2),
    "iii": (-PI, 0.0, PI / 2),
    "iv": (-PI, -PI / 2, 0.0, PI / 2),
    "v": (-PI, PI / 4, PI / 2),
    "vi": (-PI / 2, PI / 2),
}


def theta_set(radials) -> list:
    """``{0, pi/2, pi, |r_0|, ..., |r_n|}`` with coincident angles merged."""
    return _distinct([0.0, PI / 2, PI] + [abs(float(v)) for v in radials], 1e-12)


def _same_radials(a, b) -> bool:
    return len(a) == len(b) and all(abs(x - y) <= 1e-12 for x, y in zip(a, b))


def prop8_bound(case: str, m: int, radials=None) -> int:
    """Zero bound for ``M1`` of system (10) in the six radial configurations."""
    if case not in PROP8_CASES:
        raise UsageError(f"case must be one of {PROP8_CASES}")
    if int(m) != m or m < 0:
        raise UsageError("m must be a nonnegative integer")
    h1, h0 = (m + 1) // 2, m // 2
    r = PROP8_RADIALS[case] if radials is None else tuple(float(v) for v in radials)
    if case in ("i", "ii", "iii", "iv") and not _same_radials(r, PROP8_RADIALS[case]):
        raise UsageError(f"case {case} requires radials {PROP8_RADIALS[case]}")
    if case == "i":
        return 2 * h1 + m + 1
    if case == "ii":
        return 2 * h1 + h0 + m + 2
    if case in ("iii", "iv"):
        return 2 * (h1 + h0) + m + 3
    n = len(r) - 1
    if case == "v":
        if (n < 2 or abs(r[0] + PI) > 1e-12 or abs(r[-1] - PI / 2) > 1e-12
                or not 0 < r[1] < PI / 2 or np.any(np.diff(r) <= 0)):
            raise UsageError("case v requires n >= 2, r_0 = -pi, r_1 in (0, pi/2), r_n = pi/2")
        return n * (h1 + h0 + 2) + h1 + m
    PiecewiseRadialModel(m, 1.0, r)  # validates the radials
    return (len(theta_set(r)) - 1) * (h1 + h0 + 2) + m - 1


def independent_columns(A: np.ndarray, tol: float = 1e-9) -> list:
    """Column indices of a maximal independent subset, by pivoted QR."""
    norms = np.max(np.abs(A), axis=0)
    live = np.flatnonzero(norms > ZERO_COLUMN * norms.max(initial=0.0))
    if live.size == 0:
        return []
    _, R, piv = qr(A[:, live] / norms[live], mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    rank = int(np.sum(d > tol * d[0]))
    return sorted(int(live[i]) for i in piv[:rank])


@dataclass
class Prop8Report:
    case: str
    m: int
    radials: tuple
    a: float
    bound: int
    card_theta: int
    basis_rank: int
    basis_labels: list
    realized_count: int
    realized_simple: bool
    targets: list
    realized_zeros: list
    realized_mu: list
    fit_residual: float
    trials: int
    seed: int
    max_random_count: int
    random_counts: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (self.realized_count == self.basis_rank - 1 and self.realized_simple
                and self.max_random_count <= self.bound)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["radials"] = list(self.radials)
        d["passed"] = self.passed
        return d


def window(model_domain: Interval) -> tuple:
    L = model_domain.hi - model_domain.lo
    return (model_domain.lo + EDGE * L, model_domain.hi - EDGE * L)


def count_m1(fn: Callable, win: tuple, resolution: int, tol: float = 1e-12) -> ZeroReport:
    return count_zeros(fn, interval(*win), resolution, tol)


def prop8_analyze(case: str, m: int, radials=None, trials: int = 500, seed: int = 0,
                  a: float = 1.0, resolution: int = 2048, jobs: int = 1,
                  fit_tol: float = FIT_TOL) -> Prop8Report:
    """Bound, realized simple zeros and the largest count over random ``mu``.

    The ``B2`` generators are sampled on the reduced ``y`` grid; a maximal
    independent subset is chosen by pivoted QR, a combination with prescribed
    zeros is realized on it, ``mu`` is recovered by least squares against the
    ``B1`` generators (through :func:`m1_system10`) and the zeros are recounted
    in ``rho``.
    """
    r = PROP8_RADIALS[case] if radials is None else tuple(float(v) for v in radials)
    bound = prop8_bound(case, m, r)
    model = PiecewiseRadialModel(m, a, r)
    secs = model.sectors()
    labels = b2_labels(m, len(secs))
    ygrid = reduced_grid(a, max(6 * len(labels), 200))
    B2 = CachedBasis(b2_basis(m, secs), len(labels))
    A = np.asarray(B2(ygrid), float).T
    keep = independent_columns(A)
    rank = len(keep)

    def sub(y):
        v = B2(y)
        return _stack([_rows(v, j) for j in keep])

    # prescribed zeros: evenly spaced in rho, mapped to y
    dom = model.domain
    rho_t = np.linspace(0.1, 0.9, rank - 1) * dom.hi
    y_t = np.sort(1.0 / (a * rho_t))
    try:
        coef = realize_zeros(sub, y_t)
    except DegenerateSystemError as exc:
        raise DegenerateSystemError(f"realization failed for case {case}, m={m}: {exc}",
                                    nodes=[float(v) for v in y_t]) from exc
    target = _contract(coef, np.asarray(sub(ygrid), float))

    # recover mu: the same values as a combination of the B1 route
    basis10 = CachedBasis(system10_basis(m, a, r), model.mu.size)
    rho_grid = 1.0 / (a * ygrid)
    G = np.asarray(basis10(rho_grid), float) * ygrid ** (m - 1)
    mu, res = fit_columns(G.T, target)
    if res > fit_tol:
        raise SpanMembershipError(f"realized combination not reproduced by mu (residual {res:.3g})",
                                  residual=res)
    win = window(dom)
    rep = count_m1(combination(basis10, mu), win, resolution)

    rng = np.random.default_rng(seed)
    draws = rng.standard_normal((trials, model.mu.size))

    def one(i):
        z = count_m1(combination(basis10, draws[i]), win, resolution, 1e-10)
        return z.total_with_multiplicity
    counts = run_trials(one, trials, jobs)
    return Prop8Report(case, m, r, a, bound, len(theta_set(r)), rank, [labels[j] for j in keep],
                       rep.total_with_multiplicity, rep.all_simple, [float(v) for v in sorted(rho_t)],
                       [float(z.location) for z in rep.zeros], [float(v) for v in mu], res,
                       trials, seed, max(counts, default=0), counts)


# -- system (9) experiments --------------------------------------------------------

def system9_window() -> tuple:
    return (0.01, 0.99)


def system9_realize(m: int, rho_targets=None, resolution: int = 4096) -> tuple:
    """``(lambda_hat, ZeroReport)`` for a combination with zeros at ``rho_targets``."""
    E = interval(0.0, PI)
    xi = lambda t: np.sin(t) ** 2
    if rho_targets is None:
        # evenly spaced in y = rho^(2m-1), where the C^E_{2k} basis lives
        rho_targets = np.linspace(0.2, 0.8, m) ** (1.0 / (2 * m - 1))
    rho_targets = np.asarray(rho_targets, float)
    if rho_targets.size != m:
        raise UsageError(f"system (9) with m={m} takes exactly {m} targets")
    y = rho_targets ** (2 * m - 1)
    fam = lambda yy: cs_trig_many(E, [2 * k for k in range(m + 1)], "cos", yy, 1.0, 1, xi)
    lam = realize_zeros(fam, y)
    rep = count_zeros(lambda r: m1_system9(System9Model(m, tuple(lam)), r),
                      interval(*system9_window()), resolution)
    return lam, rep


def system9_random_counts(m: int, trials: int, seed: int = 0, resolution: int = 2048,
                          jobs: int = 1) -> list:
    basis = CachedBasis(system9_basis(m), m + 1)
    draws = np.random.default_rng(seed).standard_normal((trials, m + 1))
    win = interval(*system9_window())

    def one(i):
        return count_zeros(combination(basis, draws[i]), win, resolution, 1e-10).total_with_multiplicity
    return run_trials(one, trials, jobs)


def system11_random_counts(a_list, b_list, m: int, trials: int, seed: int = 0,
                           resolution: int = 2048, jobs: int = 1) -> list:
    model = System11Model(a_list, b_list, m)
    basis = CachedBasis(system11_basis(a_list, b_list, m), 2 * len(monomials(m)))
    draws = np.random.default_rng(seed).standard_normal((trials, 2 * len(monomials(m))))
    win = interval(*system11_window(model))

    def one(i):
        return count_zeros(combination(basis, draws[i]), win, resolution, 1e-10).total_with_multiplicity
    return run_trials(one, trials, jobs)


def sweep(fn: Callable, rhos, derivative: bool = False) -> dict:
    """``{"rho", "M1"[, "dM1"]}`` columns; the derivative comes from a first-order jet."""
    rhos = np.asarray(rhos, float)
    out = {"rho": rhos, "M1": np.asarray(fn(rhos), float)}
    if derivative:
        j = fn(Jet.variable(rhos, 1))
        out["dM1"] = np.asarray(j.coeffs[1], float) if isinstance(j, Jet) else np.zeros_like(rhos)
    return out
