"""Named suites of numerical identity checks.

Each suite returns a :class:`SuiteResult` holding one :class:`Check` per
identity instance.  The suites are deterministic for a given seed and are
shared by the command line and the test suite.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from .errors import UsageError
from .families import (IntegralFamilySpec, IntegralPiece, chebpoly_expand, cs_alpha_many,
                       kernel_family)
from .melnikov import (b1_basis, b1_generator_identities, b2_basis, derivative_identity_sides,
                       lemma_2_9_sides, prop61_generators, sector_pieces)
from .numeric import jet as jm
from .numeric.interval import interval
from .verify import SpanBasis, check_trig_recursion, span_equal, verify_lemma_2_6, verify_prop2

PI = math.pi
THETA_GRID = np.linspace(0.01, PI - 0.01, 240)


@dataclass
class Check:
    label: str
    residual: float
    threshold: float
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class SuiteResult:
    suite: str
    seed: int
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def worst(self) -> float:
        return max((c.residual / c.threshold for c in self.checks), default=0.0)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"suite": self.suite, "seed": self.seed, "version": __version__,
                "passed": self.passed, "checks": [asdict(c) for c in self.checks]}

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteResult":
        return cls(d["suite"], int(d["seed"]), [Check(**c) for c in d.get("checks", [])])


def _check(label, residual, threshold, **detail) -> Check:
    r = float(residual)
    return Check(label, r, float(threshold), bool(r <= threshold), detail)


def _rel(lhs, rhs) -> float:
    return abs(lhs - rhs) / max(1.0, abs(lhs))


def _poly(c):
    c = np.array(c, dtype=float)
    return lambda t: np.polyval(c, t)


# -- Lemma 2.6 ----------------------------------------------------------------------

def suite_lemma_2_6(seed: int = 0, n2: int = 50, n3: int = 20) -> SuiteResult:
    """det of integrals vs integral of the determinant, random cubic entries."""
    rng = np.random.default_rng(seed)
    checks = []
    for size, count in ((2, n2), (3, n3)):
        for trial in range(count):
            C = rng.normal(size=(size, size, 4))
            starts = rng.uniform(-1.0, 1.0, size)
            Vs = [interval(s, s + 1.0) for s in starts]
            phis = [[_poly(C[i, j]) for j in range(size)] for i in range(size)]
            checks.append(_check(f"{size}x{size} #{trial}", verify_lemma_2_6(phis, Vs), 1e-8,
                                 starts=starts.tolist()))
    return SuiteResult("lemma2.6", seed, checks)


# -- Proposition 2 --------------------------------------------------------------------

def prop2_examples() -> list:
    """``(label, spec, y, ks)`` for the three reference configurations."""
    one = lambda t: 1.0 + 0.0 * t
    E01 = interval(0.0, 1.0)
    exp_spec = IntegralFamilySpec((IntegralPiece(E01, (one,), lambda t, y: jm.exp(t * y)),),
                                  interval(-1.0, 1.0), name="exp(ty)")
    lin = kernel_family(interval(0.0, 0.5), [one, lambda t: t], lambda t: t, 1.0,
                        interval(-1.0, 1.0), name="{1, t} (1 - y t)^-1")
    G = lambda t, y: jm.power(1.0 - y * t, -0.5)
    two = IntegralFamilySpec((IntegralPiece(interval(0.0, 0.2), (one,), G),
                              IntegralPiece(interval(0.3, 0.5), (one,), G)),
                             interval(-1.0, 1.0), name="two pieces (1 - y t)^-1/2")
    return [("exp(ty), k0=0", exp_spec, 0.7, [0]),
            ("{1,t}/(1-yt), k0=1", lin, 0.0, [1]),
            ("two pieces, k=(0,0)", two, 0.5, [0, 0])]


def suite_prop2(seed: int = 0, random_cases: int = 10) -> SuiteResult:
    """Wronskian of integrals against the symmetrized product integral."""
    checks = []
    for label, spec, y, ks in prop2_examples():
        lhs, rhs, res = verify_prop2(spec, y, ks)
        checks.append(_check(label, res, 1e-6, lhs=lhs, rhs=rhs, y=y))
    # closed form of the first configuration
    lhs = verify_prop2(prop2_examples()[0][1], 0.7, [0])[0]
    checks.append(_check("exp(ty) closed form", _rel(lhs, math.expm1(0.7) / 0.7), 1e-10))
    rng = np.random.default_rng(seed)
    gs = {"t": (lambda t: t, interval(0.0, 0.5)), "cos t": (jm.cos, interval(0.0, PI / 2))}
    for trial in range(random_cases):
        gname = ("t", "cos t")[trial % 2]
        g, E = gs[gname]
        alpha = float(rng.choice([0.5, 1.0, 1.5]))
        y = float(rng.uniform(-0.9, 0.9))
        w = [_poly(rng.normal(size=3)) for _ in range(2)]
        spec = kernel_family(E, w, g, alpha, interval(-0.95, 0.95))
        lhs, rhs, res = verify_prop2(spec, y, [1])
        checks.append(_check(f"random g={gname} alpha={alpha} #{trial}", res, 1e-6,
                             lhs=lhs, rhs=rhs, y=y))
    return SuiteResult("prop2", seed, checks)


# -- span identities -------------------------------------------------------------------

def _span_check(label, A, B, grid=THETA_GRID) -> Check:
    r = span_equal(SpanBasis(tuple(A), grid), SpanBasis(tuple(B), grid))
    return Check(label, 0.0 if r.equal else 1.0, 0.5, r.equal,
                 {"rank_a": r.rank_a, "rank_b": r.rank_b, "rank_union": r.rank_union})


def _c(k, f=None):
    if f is None:
        return lambda t: np.cos(k * t)
    return lambda t: f(t) * np.cos(k * t)


def _cp(k, f=None):
    if f is None:
        return lambda t: np.cos(t) ** k
    return lambda t: f(t) * np.cos(t) ** k


def _s(k):
    return lambda t: np.sin(k * t)


def suite_eq24(seed: int = 0, kmax: int = 10, imax: int = 4) -> SuiteResult:
    """Cosine multiple angles as polynomials in the cosine, and the cosine span equalities."""
    th = np.random.default_rng(seed).uniform(0.0, PI, 50)
    checks = []
    for k in range(kmax + 1):
        c = chebpoly_expand(k)
        rec = sum(ci * np.cos(th) ** i for i, ci in enumerate(c))
        checks.append(_check(f"cos {k}t reconstruction", np.max(np.abs(np.cos(k * th) - rec)),
                             1e-12))
    for i in range(1, imax + 1):
        checks.append(_span_check(f"<cos jt, j<={i}> = <cos^j t>",
                                  [_c(j) for j in range(i + 1)], [_cp(j) for j in range(i + 1)]))
        checks.append(_span_check(f"<cos 2jt, j<={i}> = <cos^2j t>",
                                  [_c(2 * j) for j in range(i + 1)],
                                  [_cp(2 * j) for j in range(i + 1)]))
        odd = [_c(2 * j + 1) for j in range(i + 1)]
        checks.append(_span_check(f"<cos (2j+1)t, j<={i}> = <cos^(2j+1) t>", odd,
                                  [_cp(2 * j + 1) for j in range(i + 1)]))
        checks.append(_span_check(f"<cos (2j+1)t, j<={i}> = <cos t cos 2jt>", odd,
                                  [_c(2 * j, np.cos) for j in range(i + 1)]))
    return SuiteResult("eq24", seed, checks)


def suite_eq37(seed: int = 0, imax: int = 4) -> SuiteResult:
    """Sine span equalities."""
    checks = []
    for i in range(1, imax + 1):
        checks.append(_span_check(f"<sin jt, j<={i}> = <sin t cos^(j-1) t>",
                                  [_s(j) for j in range(1, i + 1)],
                                  [_cp(j, np.sin) for j in range(i)]))
        even = [_s(2 * j) for j in range(1, i + 1)]
        checks.append(_span_check(f"<sin 2jt, j<={i}> = <sin t cos^(2j-1) t>", even,
                                  [_cp(2 * j - 1, np.sin) for j in range(1, i + 1)]))
        checks.append(_span_check(f"<sin 2jt, j<={i}> = <sin t cos (2j-1)t>", even,
                                  [_c(2 * j - 1, np.sin) for j in range(1, i + 1)]))
        odd = [_s(2 * j + 1) for j in range(i + 1)]
        checks.append(_span_check(f"<sin (2j+1)t, j<={i}> = <sin t cos^2j t>", odd,
                                  [_cp(2 * j, np.sin) for j in range(i + 1)]))
        checks.append(_span_check(f"<sin (2j+1)t, j<={i}> = <sin t cos 2jt>", odd,
                                  [_c(2 * j, np.sin) for j in range(i + 1)]))
    return SuiteResult("eq37", seed, checks)


# -- Lemma 2.9 and the derivative identity ----------------------------------------------------

LEMMA_2_9_SETS = (interval(0.0, PI), interval(0.0, PI / 2), interval(-PI, -PI / 4))


def _iv(E) -> str:
    return f"({E.lo:.4g}, {E.hi:.4g})"


def central_derivative(f: Callable, y: float, h1: float = 1e-4, h2: float = 1e-5) -> float:
    """Central differences at two steps combined by Richardson extrapolation."""
    d1 = (f(y + h1) - f(y - h1)) / (2 * h1)
    d2 = (f(y + h2) - f(y - h2)) / (2 * h2)
    r = (h1 / h2) ** 2
    return (r * d2 - d1) / (r - 1)


def suite_lemma_2_9(seed: int = 0) -> SuiteResult:
    """Polynomial shift identity of the Cauchy-type trig integrals, its corollaries
    for the B1 generators, and the derivative identity in ``y``."""
    checks = []
    for E in LEMMA_2_9_SETS:
        for kappa in (0, 1):
            for k in range(4):
                for l in (-1, 0, 1, 2):
                    if k + l < 0:
                        continue
                    for y in (1.5, 2.0, 5.0):
                        lhs, rhs = lemma_2_9_sides(E, kappa, k, l, y)
                        checks.append(_check(f"E={_iv(E)} kappa={kappa} k={k} l={l} y={y}",
                                             _rel(lhs, rhs), 1e-8, lhs=lhs, rhs=rhs))
    for m in range(3):
        for E in LEMMA_2_9_SETS[:2]:
            for y in (1.5, 3.0):
                for label, lhs, rhs in b1_generator_identities(m, E, y):
                    checks.append(_check(f"m={m} E={_iv(E)} y={y} {label}", _rel(lhs, rhs), 1e-8))
    E = LEMMA_2_9_SETS[0]
    for which in ("cos", "sin"):
        for k in range(4):
            for y in (1.5, 2.0, 5.0):
                f = lambda v, k=k, which=which: float(np.ravel(
                    cs_alpha_many(E, [k], which, 1.0, v))[0])
                fd = central_derivative(f, y)
                target = -float(np.ravel(cs_alpha_many(E, [k], which, 2.0, y))[0])
                scale = max(abs(target), 1e-300)
                checks.append(_check(f"d/dy {which} k={k} y={y} (differences)",
                                     abs(fd - target) / scale, 1e-5, lhs=fd, rhs=target))
                for l in (1, 2):
                    lhs, rhs = derivative_identity_sides(E, k, 1.0, l, y, which)
                    checks.append(_check(f"d^{l}/dy^{l} {which} k={k} y={y} (jets)",
                                         abs(lhs - rhs) / max(abs(rhs), 1e-300), 1e-5,
                                         lhs=lhs, rhs=rhs))
    return SuiteResult("lemma2.9", seed, checks)


# -- Propositions 6 and 6.1 --------------------------------------------------------------

def _sampled(values: np.ndarray) -> list:
    return [lambda t, j=j: values[j] for j in range(values.shape[0])]


def suite_prop6(seed: int = 0, radials=(0.0, PI / 2), a: float = 1.0) -> SuiteResult:
    """The B1 and B2 spans of the reduced Melnikov function coincide."""
    sectors = sector_pieces(radials)
    y = math.copysign(1.0, a) * np.geomspace(1.05, 20.0, 200)
    checks = []
    for m in range(3):
        A, B = b1_basis(m, sectors)(y), b2_basis(m, sectors)(y)
        c = _span_check(f"B1 = B2, m={m}, radials={tuple(radials)}", _sampled(A), _sampled(B),
                        y)
        checks.append(c)
    return SuiteResult("prop6", seed, checks)


def prop61_grid(n_rho: int = 15, n_theta: int = 15, a: float = 1.0) -> np.ndarray:
    rr, tt = np.meshgrid(np.linspace(0.1, 0.9, n_rho) / abs(a), np.linspace(-3.0, 3.0, n_theta))
    return np.stack([rr.ravel(), tt.ravel()], axis=1)


def suite_prop61(seed: int = 0, a: float = 1.0) -> SuiteResult:
    """The monomial generators in ``(rho, theta)`` and the reduced generators span alike."""
    g = prop61_grid(a=a)
    checks = []
    for m in range(3):
        V0, V1 = prop61_generators(m, a)
        checks.append(_span_check(f"V0 = V1, m={m}", V0, V1, g))
    return SuiteResult("prop6.1", seed, checks)


# -- trigonometric Wronskian recursion ---------------------------------------------------------

def suite_trig_recursion(seed: int = 0, mmax: int = 4) -> SuiteResult:
    th = np.random.default_rng(seed).uniform(0.0, PI, 20)
    checks = [_check(f"m={m} i={i}", check_trig_recursion(m, i, th), 1e-6)
              for m in range(1, mmax + 1) for i in range(1, m + 1)]
    return SuiteResult("appendixA1", seed, checks)


SUITES = {
    "lemma2.6": suite_lemma_2_6,
    "prop2": suite_prop2,
    "eq24": suite_eq24,
    "eq37": suite_eq37,
    "lemma2.9": suite_lemma_2_9,
    "prop6": suite_prop6,
    "prop6.1": suite_prop61,
    "appendixA1": suite_trig_recursion,
}


def run_suite(name: str, seed: int = 0) -> SuiteResult:
    if name not in SUITES:
        raise UsageError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return SUITES[name](seed=seed)
