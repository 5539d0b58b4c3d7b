"""Numerical sign certification of CT/ECT status and the related identity checks.

A family is certified by sampling leading Wronskians and asking whether the
sampled values keep one sign while staying clear of a threshold.  A
sampled value counts when it exceeds ``1e-9`` times the largest sampled
magnitude and also a componentwise rounding-noise estimate of the
determinant (see :func:`det_noise`).

Sampling cannot prove anything: a Wronskian that vanishes on a set thinner
than the grid spacing, or changes sign there, goes unnoticed.  Certificates
carry their thresholds, grid sizes and seeds so a verdict can be reproduced.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import UsageError
from .families import IntegralFamilySpec
from .numeric.interval import Interval, hull
from .numeric.jet import Jet
from .numeric.linalg import det
from .numeric.quadrature import integrate_product, integrate_weighted
from .wronskian import FunctionFamily

THRESHOLD_REL = 1e-9
NOISE_ULPS = 256.0
EPS = np.finfo(float).eps
MARGIN = 1e-6
REFINE_LEVELS = 3
REFINE_POINTS = 17
UNBOUNDED_SPAN = 100.0

LIMITATION = ("sampled check: vanishing or sign changes on sets thinner than the sampling "
              "resolution are not detected")


@dataclass
class SignCertificate:
    """Evidence for one sign check, or a composite of several.

    ``witnesses`` hold dictionaries: ``{"kind": "sign-change", "points": [p, q],
    "values": [v, w]}`` or ``{"kind": "near-zero", "point": p, "value": v}``.
    ``excluded`` lists edge windows whose values stayed below threshold.
    """

    verdict: str
    grid_points: int = 0
    min_abs: float = 0.0
    sign: int | None = None
    witnesses: list = field(default_factory=list)
    threshold: float = 0.0
    threshold_rel: float = THRESHOLD_REL
    label: str = ""
    seed: int | None = None
    excluded: list = field(default_factory=list)
    note: str = ""
    parts: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["parts"] = [p.to_dict() for p in self.parts]
        return _plain(d)

    @classmethod
    def from_dict(cls, d: dict) -> "SignCertificate":
        d = dict(d)
        parts = [cls.from_dict(p) for p in d.pop("parts", [])]
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in d.items() if k in known}, parts=parts)

    def failing(self) -> list:
        """Leaf certificates that did not pass."""
        if not self.parts:
            return [] if self.passed else [self]
        return [leaf for p in self.parts for leaf in p.failing()]


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, np.generic):
        return x.item()
    return x


def _pt(p):
    p = np.asarray(p, dtype=float)
    return float(p) if p.ndim == 0 else p.tolist()


def adjugate(M: np.ndarray) -> np.ndarray:
    """Adjugate of each matrix in a stack, via the SVD (defined for singular input)."""
    A = np.array(M, dtype=float)
    n = A.shape[-1]
    if n == 1:
        return np.ones_like(A)
    U, s, Vt = np.linalg.svd(A)
    c = np.stack([np.prod(np.delete(s, i, axis=-1), axis=-1) for i in range(n)], axis=-1)
    sgn = np.linalg.det(U) * np.linalg.det(Vt)
    return sgn[..., None, None] * np.swapaxes(Vt, -1, -2) @ (c[..., :, None] * np.swapaxes(U, -1, -2))


def det_noise(M: np.ndarray) -> np.ndarray:
    """Rounding-noise estimate ``256 eps sum_ij |a_ij| |adj(A)_ji|`` for a stack.

    Elimination with partial pivoting is backward stable componentwise, and
    the entries themselves are accurate relative to their size, so each entry
    carries a relative perturbation of a few ulps; ``adj(A)_ji`` is the
    sensitivity of the determinant to entry ``(i, j)``.  Rows are scaled by
    their largest entry first to keep the SVD well balanced.
    """
    A = np.array(M, dtype=float)
    r = np.max(np.abs(A), axis=-1)
    A = A / np.where(r == 0, 1.0, r)[..., None]
    sens = np.sum(np.abs(A) * np.abs(np.swapaxes(adjugate(A), -1, -2)), axis=(-2, -1))
    return NOISE_ULPS * EPS * np.prod(r, axis=-1) * sens


def classify(values, points, noise=0.0, ordered: bool = True, interior_runs_fail: bool = True,
             label: str = "") -> SignCertificate:
    """Sign verdict for sampled values of one function.

    ``points[i]`` is where ``values[i]`` was taken (reals, or node tuples).
    A value is *resolved* when it exceeds both the relative threshold and
    its rounding-noise estimate; only resolved values carry a sign.  Two
    resolved values of opposite sign fail the check, and with no resolved
    value at all the verdict is inconclusive.  With ``ordered`` the points
    are sorted reals, a sign change is reported between neighbouring
    resolved points, and with ``interior_runs_fail`` an unresolved stretch
    strictly inside the window fails as a near-zero.  Unresolved stretches
    touching either end are reported in ``excluded``.
    """
    v = np.asarray(values, dtype=float).ravel()
    pts = np.asarray(points, dtype=float)
    n = v.size
    noise = np.broadcast_to(np.asarray(noise, dtype=float), v.shape)
    scale = float(np.max(np.abs(v))) if n else 0.0
    thr = THRESHOLD_REL * scale
    bounded = (np.abs(v) > noise) & (np.abs(v) > thr)
    reliable = bounded
    cert = SignCertificate("inconclusive", n, scale, None, [], thr, label=label)
    if scale == 0 or not bounded.any():
        cert.note = "all sampled values are below threshold"
        if n:
            i = int(np.argmin(np.abs(v)))
            cert.witnesses.append({"kind": "near-zero", "point": _pt(pts[i]), "value": float(v[i])})
        return cert
    pos, neg = reliable & (v > 0), reliable & (v < 0)
    cert.min_abs = float(np.min(np.abs(v[bounded])))
    if pos.any() and neg.any():
        cert.verdict = "fail"
        if ordered:
            idx = np.flatnonzero(reliable)
            sg = np.sign(v[idx])
            j = int(np.flatnonzero(sg[1:] != sg[:-1])[0])
            a, b = idx[j], idx[j + 1]
        else:
            a = int(np.argmax(np.where(pos, v, -np.inf)))
            b = int(np.argmin(np.where(neg, v, np.inf)))
        cert.witnesses.append({"kind": "sign-change", "points": [_pt(pts[a]), _pt(pts[b])],
                               "values": [float(v[a]), float(v[b])]})
        i = int(np.argmin(np.abs(v)))
        cert.witnesses.append({"kind": "near-zero", "point": _pt(pts[i]), "value": float(v[i])})
        return cert
    cert.sign = 1 if pos.any() else -1
    if ordered:
        first, last = int(np.argmax(bounded)), int(n - 1 - np.argmax(bounded[::-1]))
        if first > 0:
            cert.excluded.append([_pt(pts[0]), _pt(pts[first - 1])])
        if last < n - 1:
            cert.excluded.append([_pt(pts[last + 1]), _pt(pts[n - 1])])
        gap = ~bounded[first:last + 1]
        if interior_runs_fail and gap.any():
            inner = np.flatnonzero(gap) + first
            i = inner[int(np.argmin(np.abs(v[inner])))]
            cert.verdict = "fail"
            cert.sign = None
            cert.witnesses.append({"kind": "near-zero", "point": _pt(pts[i]), "value": float(v[i]),
                                   "threshold": float(max(thr, noise[i]))})
            return cert
    cert.verdict = "pass"
    return cert


def composite(parts: Sequence[SignCertificate], label: str = "", note: str = "") -> SignCertificate:
    """Combine per-prefix certificates.

    Any failure fails.  If some parts are inconclusive while others resolved,
    the resolved prefixes show the members are not all degenerate, so the
    unresolved prefix is an identically (or nearly) vanishing Wronskian and
    the whole fails.  All inconclusive stays inconclusive.
    """
    parts = list(parts)
    verdicts = [p.verdict for p in parts]
    cert = SignCertificate("pass", sum(p.grid_points for p in parts),
                           min((p.min_abs for p in parts), default=0.0),
                           None, [], max((p.threshold for p in parts), default=0.0),
                           label=label, note=note, parts=parts)
    if "fail" in verdicts:
        cert.verdict = "fail"
    elif all(v == "inconclusive" for v in verdicts):
        cert.verdict = "inconclusive"
    elif "inconclusive" in verdicts:
        cert.verdict = "fail"
        cert.note = (note + "; " if note else "") + \
            "a prefix vanishes at every sample while others do not"
    for p in parts:
        if p.verdict != "pass":
            cert.witnesses.extend(dict(w, prefix=p.label) for w in p.witnesses)
    signs = {p.sign for p in parts}
    if cert.verdict == "pass" and len(signs) == 1:
        cert.sign = signs.pop()
    return cert


# -- windows ----------------------------------------------------------------------

def sampling_window(dom: Interval, margin: float = MARGIN) -> tuple:
    """Finite closed window inside ``dom``; unbounded sides are cut at 100 units."""
    lo, hi = dom.lo, dom.hi
    if not math.isfinite(lo) and not math.isfinite(hi):
        lo, hi = -UNBOUNDED_SPAN, UNBOUNDED_SPAN
    elif not math.isfinite(hi):
        hi = lo + UNBOUNDED_SPAN * max(1.0, abs(lo))
    elif not math.isfinite(lo):
        lo = hi - UNBOUNDED_SPAN * max(1.0, abs(hi))
    return Interval(lo, hi, dom.lo_open or not math.isfinite(dom.lo),
                    dom.hi_open or not math.isfinite(dom.hi)).inner(margin)


# -- ECT --------------------------------------------------------------------------

def _prefix_data(fam: FunctionFamily, t: np.ndarray):
    D = fam.derivative_matrix(t)                         # (N, n, n)
    n = len(fam)
    W = np.stack([np.atleast_1d(det(D[:, :k + 1, :k + 1])) for k in range(n)])
    noise = np.stack([det_noise(D[:, :k + 1, :k + 1]) for k in range(n)])
    return W, noise


def check_ect(fam: FunctionFamily, grid_n: int = 400, window=None,
              refine_levels: int = REFINE_LEVELS) -> SignCertificate:
    """Certify every leading continuous Wronskian on a grid over the domain.

    Each prefix is refined ``refine_levels`` times around its smallest
    interior sample.  Returns a composite certificate with one part per prefix.
    """
    if grid_n < 8:
        raise UsageError("grid_n must be at least 8")
    lo, hi = window if window is not None else sampling_window(fam.domain)
    t = np.linspace(lo, hi, grid_n)
    W, noise = _prefix_data(fam, t)
    for k in range(len(fam)):
        for _ in range(refine_levels):
            extra = _refine_points(t, W[k], noise[k])
            if extra is None:
                break
            W2, n2 = _prefix_data(fam, extra)
            t = np.concatenate([t, extra])
            order = np.argsort(t, kind="stable")
            t, W, noise = t[order], np.concatenate([W, W2], 1)[:, order], \
                np.concatenate([noise, n2], 1)[:, order]
            t, keep = np.unique(t, return_index=True)
            W, noise = W[:, keep], noise[:, keep]
    parts = [classify(W[k], t, noise[k], label=f"W{k + 1}[{', '.join(fam.labels[:k + 1])}]")
             for k in range(len(fam))]
    note = f"window [{lo:.17g}, {hi:.17g}]; {LIMITATION}"
    return composite(parts, fam.name or "ECT", note)


def _refine_points(t, w, noise):
    a = np.abs(w)
    res = (a > noise) & (a > THRESHOLD_REL * a.max())
    if not res.any():
        return None
    first, last = int(np.argmax(res)), int(len(a) - 1 - np.argmax(res[::-1]))
    if last - first < 2:
        return None
    i = first + 1 + int(np.argmin(a[first + 1:last]))
    pts = np.linspace(t[i - 1], t[i + 1], REFINE_POINTS)[1:-1]
    return pts[(pts != t[i])]


# -- CT ---------------------------------------------------------------------------

def latin_hypercube(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` stratified samples in ``[0, 1)^d``."""
    u = (rng.random((n, d)) + np.arange(n)[:, None]) / n
    for j in range(d):
        u[:, j] = u[rng.permutation(n), j]
    return u


def check_ct(fam: FunctionFamily, tuples_n: int = 2000, seed: int = 0,
             window=None) -> SignCertificate:
    """Certify discrete Wronskians at stratified random increasing node tuples."""
    if tuples_n < 8:
        raise UsageError("tuples_n must be at least 8")
    lo, hi = window if window is not None else sampling_window(fam.domain)
    rng = np.random.default_rng(seed)
    parts = []
    for k in range(len(fam)):
        nodes = np.sort(lo + (hi - lo) * latin_hypercube(tuples_n, k + 1, rng), axis=1)
        V = np.moveaxis(fam.prefix(k).values(nodes), 0, -1)     # (N, node, member)
        D = np.atleast_1d(det(V))
        noise = det_noise(V)
        parts.append(classify(D, nodes, noise, ordered=False, interior_runs_fail=False,
                              label=f"D{k + 1}[{', '.join(fam.labels[:k + 1])}]"))
    cert = composite(parts, fam.name or "CT", f"window [{lo:.17g}, {hi:.17g}]; {LIMITATION}")
    cert.seed = seed
    return cert


# -- hypothesis (H) ---------------------------------------------------------------

def _kernel_columns(spec: IntegralFamilySpec, ks: Sequence[int], tcols: list, y: np.ndarray):
    """Derivative matrix ``[d^r/dy^r G_i(t_{ij}, y)]``, shape ``(S, M+1, M+1)``."""
    M = sum(k + 1 for k in ks) - 1
    yj = Jet.variable(y, M)
    cols = []
    for i, k in enumerate(ks):
        for j in range(k + 1):
            r = spec.pieces[i].kernel(tcols[i][:, j], yj)
            tc = r.coeffs if isinstance(r, Jet) else Jet.constant(r, M).coeffs
            cols.append(np.broadcast_to(tc, (M + 1, y.size)))
    return np.moveaxis(np.stack(cols, axis=-1), 0, 1)        # (S, M+1, M+1)


def hypothesis_product(spec: IntegralFamilySpec, ks: Sequence[int], tcols: list, y: np.ndarray):
    """The product ``prod_i D[f_i; t_i] * W[G_0(t_00,.), ...](y)`` and its noise floor."""
    value = 1.0
    mats = []
    for i, k in enumerate(ks):
        p = spec.pieces[i]
        mats.append(np.stack([p.weight_matrix(tcols[i][:, j])[:k + 1].T for j in range(k + 1)],
                             axis=1))
    mats.append(_kernel_columns(spec, ks, tcols, y))
    dets = [np.atleast_1d(det(V)) for V in mats]
    noises = [det_noise(V) for V in mats]
    value = np.prod(dets, axis=0)
    noise = np.zeros_like(value)
    for j in range(len(mats)):
        others = [np.abs(d) for i, d in enumerate(dets) if i != j]
        noise = noise + noises[j] * (np.prod(others, axis=0) if others else 1.0)
    return value, noise


def check_hypothesis_H(spec: IntegralFamilySpec, samples: int = 4096, seed: int = 0,
                       y_strata: int = 16) -> SignCertificate:
    """Sampled check of the sign condition on every product ``prod D * W``.

    For each choice of ``s`` and ``k_0..k_s`` the ``y`` range is cut into
    strata; in each stratum one ``y`` is drawn and the node tuples are a
    Latin hypercube over ``E_0^(k_0+1) x ... x E_s^(k_s+1)``.  The sign must be
    constant among resolved samples at each ``y``; it may differ between
    strata, as the condition is pointwise in ``y``.
    """
    rng = np.random.default_rng(seed)
    ylo, yhi = sampling_window(spec.U)
    wins = [sampling_window(p.E) for p in spec.pieces]
    per = max(8, samples // y_strata)
    combos = []
    for s in range(len(spec.pieces)):
        for ks in itertools.product(*[range(m) for m in spec.sizes[:s + 1]]):
            strata = []
            yv = ylo + (yhi - ylo) * (np.arange(y_strata) + rng.random(y_strata)) / y_strata
            for yy in yv:
                u = latin_hypercube(per, sum(k + 1 for k in ks), rng)
                tcols, c = [], 0
                for i, k in enumerate(ks):
                    lo, hi = wins[i]
                    tcols.append(np.sort(lo + (hi - lo) * u[:, c:c + k + 1], axis=1))
                    c += k + 1
                val, noise = hypothesis_product(spec, ks, tcols, np.full(per, yy))
                pts = np.concatenate(tcols + [np.full((per, 1), yy)], axis=1)
                strata.append(classify(val, pts, noise, ordered=False, interior_runs_fail=False,
                                       label=f"y={yy:.6g}"))
            combos.append(composite(strata, f"s={s}, k={list(ks)}"))
    cert = composite(combos, spec.name or "hypothesis (H)", LIMITATION)
    cert.seed = seed
    return cert


# -- identities -------------------------------------------------------------------

def verify_lemma_2_6(phis, Vs: Sequence[Interval], tol: float = 1e-12) -> float:
    """Relative gap between ``det[int_{V_j} phi_ij]`` and the integral of ``det[phi_ij(t_j)]``.

    ``phis[i][j]`` is integrated over ``Vs[j]``.  The scale is the product over
    columns of the largest absolute entry, the Hadamard-type size of the left
    side, so cancellation in the determinant does not inflate the residual.
    """
    n = len(Vs)
    if n > 3 or any(len(row) != n for row in phis) or len(phis) != n:
        raise UsageError("need a square matrix of integrands of size at most 3")
    A = np.empty((n, n))
    for j in range(n):
        w = lambda t, j=j: np.stack([np.broadcast_to(np.asarray(phis[i][j](t), float), t.shape)
                                      for i in range(n)])
        A[:, j] = integrate_weighted(w, lambda t, y: 1.0 + 0.0 * t, Vs[j], 0.0, tol).value
    lhs = det(A)

    def integrand(*ts):
        M = np.stack([np.stack([np.broadcast_to(np.asarray(phis[i][j](ts[j]), float), ts[j].shape)
                                for j in range(n)], axis=-1) for i in range(n)], axis=-2)
        return np.atleast_1d(det(M))

    rhs = integrate_product(integrand, list(Vs), tol).value
    scale = float(np.prod(np.max(np.abs(A), axis=0)))
    if scale == 0:
        return float(abs(lhs - rhs))
    return float(abs(lhs - rhs) / scale)


def verify_prop2(spec: IntegralFamilySpec, y: float, ks: Sequence[int],
                 tol: float = 1e-11) -> tuple:
    """Both sides of the Wronskian-of-integrals formula for the prefix ``ks``.

    Returns ``(lhs, rhs, residual)`` with ``residual = |lhs - rhs| / max(1, |lhs|)``.
    """
    ks = list(ks)
    M = sum(k + 1 for k in ks) - 1
    if M + 1 > 4:
        raise UsageError("product integral limited to dimension 4")
    yj = Jet.variable(float(y), M)
    cols = []
    for i, k in enumerate(ks):
        p = spec.pieces[i]
        r = integrate_weighted(lambda t, p=p, k=k: p.weight_matrix(t)[:k + 1], p.kernel, p.E,
                               yj, tol).value
        cols.append(r.coeffs)                               # (M+1, k+1)
    lhs = det(np.concatenate(cols, axis=1))
    Es = [spec.pieces[i].E for i, k in enumerate(ks) for _ in range(k + 1)]

    def integrand(*ts):
        tcols, c = [], 0
        for k in ks:
            tcols.append(np.stack(ts[c:c + k + 1], axis=1))
            c += k + 1
        val, _ = hypothesis_product(spec, ks, tcols, np.full(ts[0].shape, float(y)))
        return val

    rhs = integrate_product(integrand, Es, tol).value / math.prod(math.factorial(k + 1) for k in ks)
    return float(lhs), float(rhs), float(abs(lhs - rhs) / max(1.0, abs(lhs)))


# -- spans ------------------------------------------------------------------------

@dataclass(frozen=True)
class SpanBasis:
    """Generators sampled on a shared grid; the grid's first axis indexes samples."""

    generators: tuple
    sample_grid: np.ndarray = field(compare=False)
    labels: tuple = ()

    def __post_init__(self):
        gens = self.generators
        if isinstance(gens, FunctionFamily):
            object.__setattr__(self, "labels", self.labels or gens.labels)
            gens = gens.members
        object.__setattr__(self, "generators", tuple(gens))
        object.__setattr__(self, "sample_grid", np.asarray(self.sample_grid, dtype=float))
        if not self.generators:
            raise UsageError("a span needs at least one generator")
        if len(self.sample_grid) < 4 * len(self.generators):
            raise UsageError("sample grid must have at least 4 points per generator")

    def matrix(self) -> np.ndarray:
        g = self.sample_grid
        n = g.shape[0]
        return np.stack([np.broadcast_to(np.asarray(f(g), dtype=float).reshape(-1), (n,))
                         for f in self.generators], axis=1)


@dataclass
class SpanReport:
    equal: bool
    rank_a: int
    rank_b: int
    rank_union: int
    singular_values: list

    def __bool__(self):
        return self.equal


def numerical_rank(A: np.ndarray, tol: float) -> tuple:
    norms = np.linalg.norm(A, axis=0)
    A = A[:, norms > 0] / norms[norms > 0]
    if A.shape[1] == 0:
        return 0, np.zeros(0)
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > tol * s[0])), s


def span_equal(A: SpanBasis, B: SpanBasis, tol: float = 1e-9) -> SpanReport:
    """Whether two generator sets span the same space on the sample grid."""
    if A.sample_grid.shape != B.sample_grid.shape or not np.array_equal(A.sample_grid,
                                                                          B.sample_grid):
        raise UsageError("span comparison needs a shared sample grid")
    if len(A.sample_grid) < 4 * (len(A.generators) + len(B.generators)):
        raise UsageError("sample grid too small for the union of generators")
    MA, MB = A.matrix(), B.matrix()
    ra, _ = numerical_rank(MA, tol)
    rb, _ = numerical_rank(MB, tol)
    ru, s = numerical_rank(np.concatenate([MA, MB], axis=1), tol)
    return SpanReport(ra == rb == ru, ra, rb, ru, s.tolist())


# -- Theorem 2 hypotheses -----------------------------------------------------------

def check_theorem2(spec: IntegralFamilySpec, grid: int = 2000, y_samples: int = 8,
                   seed: int = 0, E: Interval | None = None) -> tuple:
    """(H1) the weights of each piece are CT on ``E_i``; (H2) the kernel and its
    first ``M`` ``y``-derivatives are CT in ``t`` for sampled ``y``.

    Returns ``(list of H1 certificates, H2 certificate)``.
    """
    kernels = {id(p.kernel) for p in spec.pieces}
    if len(kernels) != 1:
        raise UsageError("all pieces must share one kernel")
    h1 = []
    for i, p in enumerate(spec.pieces):
        fam = FunctionFamily(p.weights, p.E, p.labels, f"piece {i} weights")
        h1.append(check_ct(fam, grid, seed + i))
    M = len(spec) - 1
    E = E or hull(p.E for p in spec.pieces)
    G = spec.pieces[0].kernel
    ylo, yhi = sampling_window(spec.U)
    rng = np.random.default_rng(seed)
    ys = ylo + (yhi - ylo) * (np.arange(y_samples) + rng.random(y_samples)) / y_samples
    parts = []
    for yy in ys:
        members = tuple(_kernel_derivative(G, float(yy), r, M) for r in range(M + 1))
        fam = FunctionFamily(members, E, tuple(f"d^{r}G/dy^{r}" for r in range(M + 1)))
        c = check_ct(fam, grid, seed)
        c.label = f"y={yy:.6g}"
        parts.append(c)
    h2 = composite(parts, "kernel derivatives", LIMITATION)
    h2.seed = seed
    return h1, h2


def _kernel_derivative(G: Callable, y: float, r: int, M: int) -> Callable:
    def f(t):
        t = np.asarray(t, dtype=float)
        out = G(t, Jet.variable(np.full(t.shape, y), M))
        return out.coeffs[r] if isinstance(out, Jet) else (out if r == 0 else 0.0 * t)
    return f


# -- trigonometric Wronskian recursion ------------------------------------------------

def trig_recursion_factor(m: int, i: int) -> float:
    """``prod_{l=i}^{m} l^3 prod_{j<l} (l^2 - j^2) prod_{i<=j<l} (l^2 - j^2)``."""
    out = 1.0
    for l in range(i, m + 1):
        out *= l ** 3 * math.prod(l * l - j * j for j in range(1, l)) \
            * math.prod(l * l - j * j for j in range(i, l))
    return out


def check_trig_recursion(m: int, i: int, thetas) -> float:
    """Largest relative deviation of the recursion at the given angles."""
    from .families import _cos, _sin
    from .numeric.interval import interval
    from .wronskian import wronskian_continuous
    dom = interval(0.0, math.pi)
    big = FunctionFamily(tuple(_cos(n) for n in range(m + 1)) +
                         tuple(_sin(n) for n in range(m, i - 1, -1)), dom)
    small = FunctionFamily(tuple(_cos(n) for n in range(i)), dom)
    th = np.asarray(thetas, dtype=float)
    lhs = np.atleast_1d(wronskian_continuous(big, th))
    rhs = trig_recursion_factor(m, i) * np.atleast_1d(wronskian_continuous(small, th))
    return float(np.max(np.abs(lhs - rhs) / np.maximum(np.abs(lhs), 1e-300)))


__all__ = [
    "SignCertificate", "SpanBasis", "SpanReport", "check_ect", "check_ct", "check_hypothesis_H",
    "verify_lemma_2_6", "verify_prop2", "span_equal", "check_theorem2", "classify", "composite",
    "trig_recursion_factor", "check_trig_recursion", "latin_hypercube", "numerical_rank",
    "sampling_window",
]
