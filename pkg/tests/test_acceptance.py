"""Acceptance criteria, one test each.

Every criterion prints a single ``criterion N PASS|FAIL`` line; the lines are
repeated in the pytest terminal summary.  Run this file directly to get only
the eleven lines.
"""
import math
import sys
import time

import numpy as np
import pytest

from chebmel.families import TRIG_KINDS, family18, integral_family, make_trig_family, remark1_families
from chebmel.identities import run_suite
from chebmel.melnikov import (PI, PiecewiseRadialModel, System9Model, System11Model,
                              bound_system11, coarse_bound_system11, m1_general, m1_system9,
                              m1_system10, mu_size, prop8_analyze, prop8_bound,
                              system9_random_counts, system9_realize, system10_equation,
                              system11_random_counts)
from chebmel.numeric.interval import interval
from chebmel.numeric import jet as jm
from chebmel.verify import check_ect, check_hypothesis_H, check_trig_recursion
from chebmel.wronskian import KernelSpec, kernel_wronskian_closed, kernel_wronskian_jet

LINES: list = []


def report(n: int, title: str, ok: bool, detail: str, elapsed: float) -> bool:
    line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}: {title} [{detail}; {elapsed:.1f}s]"
    LINES.append(line)
    print(line)
    return ok


# -- 1 ------------------------------------------------------------------------------

def criterion_1():
    t0 = time.perf_counter()
    r = run_suite("lemma2.6")
    n2 = sum("2x2" in c.label for c in r.checks)
    n3 = sum("3x3" in c.label for c in r.checks)
    worst = max(c.residual for c in r.checks)
    dt = time.perf_counter() - t0
    ok = r.passed and n2 == 50 and n3 == 20 and worst <= 1e-8 and dt < 10
    return report(1, "integration-determinant identity", ok,
                  f"{n2} 2x2 + {n3} 3x3, worst residual {worst:.2e}", dt)


# -- 2 ------------------------------------------------------------------------------

def criterion_2():
    t0 = time.perf_counter()
    r = run_suite("prop2")
    worst = max(c.residual for c in r.checks)
    dt = time.perf_counter() - t0
    ok = r.passed and len(r.checks) >= 13 and worst <= 1e-6 and dt < 60
    return report(2, "Wronskian of integrals", ok,
                  f"{len(r.checks)} checks, worst residual {worst:.2e}", dt)


# -- 3 ------------------------------------------------------------------------------

def criterion_3():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = 0.0
    for trial in range(100):
        g = (lambda t: t) if trial % 2 == 0 else jm.cos
        alpha = 0.0
        while alpha == 0.0 or (abs(alpha - round(alpha)) < 0.05 and round(alpha) <= 0):
            alpha = float(rng.uniform(-3, 3))
        K = int(rng.integers(0, 4))
        nodes = np.sort(rng.uniform(0.05, 0.95, K + 1))
        y = float(rng.uniform(-0.8, 0.8))
        ks = KernelSpec(g, alpha, interval(0, 1), interval(-0.9, 0.9))
        c, j = kernel_wronskian_closed(ks, y, nodes), kernel_wronskian_jet(ks, y, nodes)
        worst = max(worst, abs(c - j) / abs(c))
    dt = time.perf_counter() - t0
    return report(3, "kernel Wronskian closed form vs jets", worst <= 1e-8,
                  f"100 configurations, worst relative error {worst:.2e}", dt)


# -- 4 ------------------------------------------------------------------------------

def criterion_4():
    t0 = time.perf_counter()
    failures, checked = [], 0
    for kind in TRIG_KINDS:
        for m in range(1, 6):
            if kind.endswith("full"):
                cases = [make_trig_family(kind, m)]
            else:
                cases = [make_trig_family(kind, m, k, domain=d)
                         for k in (0, 1) for d in ((0.0, PI / 2), (PI / 2, PI))]
            for fam in cases:
                checked += 1
                if not check_ect(fam).passed:
                    failures.append(f"{fam.name} on ({fam.domain.lo:.3g}, {fam.domain.hi:.3g})")
    rng = np.random.default_rng(4)
    worst = 0.0
    for m in range(1, 5):
        th = rng.uniform(0.01, PI - 0.01, 20)
        for i in range(1, m + 1):
            worst = max(worst, check_trig_recursion(m, i, th))
    dt = time.perf_counter() - t0
    ok = not failures and worst <= 1e-6 and dt < 120
    return report(4, "trigonometric ECT families and Wronskian recursion", ok,
                  f"{checked - len(failures)}/{checked} families pass, recursion {worst:.2e}"
                  + (f", failing {failures}" if failures else ""), dt)


# -- 5 ------------------------------------------------------------------------------

def criterion_5():
    t0 = time.perf_counter()
    r = run_suite("eq24")
    recon = [c for c in r.checks if c.label.endswith("reconstruction")]
    worst = max((c.residual for c in recon), default=math.inf)
    spans = [c for c in r.checks if c not in recon]
    dt = time.perf_counter() - t0
    ok = r.passed and len(recon) == 11 and worst <= 1e-12 and len(spans) >= 4
    return report(5, "Chebyshev expansion and cosine spans", ok,
                  f"reconstruction {worst:.2e} over k<=10, {len(spans)} span checks", dt)


# -- 6 ------------------------------------------------------------------------------

def criterion_6():
    t0 = time.perf_counter()
    ok, parts = True, []
    for m in (1, 2, 3):
        _, rep = system9_realize(m)
        counts = system9_random_counts(m, 1000, seed=60 + m)
        good = rep.count == m and rep.all_simple and max(counts) <= m
        ok &= good
        parts.append(f"m={m}: realized {rep.count} simple={rep.all_simple}, max random {max(counts)}")
    dt = time.perf_counter() - t0
    ok = ok and dt < 300
    return report(6, "system (9) zero count", ok, "; ".join(parts), dt)


# -- 7 ------------------------------------------------------------------------------

def criterion_7():
    t0 = time.perf_counter()
    table1 = [prop8_bound(c, 1) for c in ("i", "ii", "iii", "iv")]
    table2 = [prop8_bound(c, 2) for c in ("i", "ii", "iii", "iv")]
    ok = table1 == [4, 5, 6, 6] and table2 == [5, 7, 9, 9]
    parts = [f"bounds m=1 {table1}, m=2 {table2}"]
    for case, m, realize in (("i", 1, True), ("i", 2, True), ("ii", 1, True),
                             ("iii", 1, False), ("iv", 1, False)):
        r = prop8_analyze(case, m, trials=500, seed=70)
        good = r.max_random_count <= r.bound
        if realize:
            good &= r.realized_count == r.bound and r.realized_simple
        ok &= good
        parts.append(f"({case}) m={m}: realized {r.realized_count}/{r.bound}, "
                     f"max random {r.max_random_count}")
    dt = time.perf_counter() - t0
    ok = ok and dt < 600
    return report(7, "piecewise system bounds", ok, "; ".join(parts), dt)


# -- 8 ------------------------------------------------------------------------------

SYSTEM11_SETS = [
    ((1.0,), (1.0,), 1),
    ((1.0,), (2.0,), 0),
    ((1.0, -2.0), (1.5,), 2),
    ((2.0, -3.0), (3.0, 2.0), 2),
    ((1.0, 2.0, 3.0), (1.0,), 3),
    ((-1.0,), (1.0, -1.0), 4),
    ((1.5,), (), 2),
    ((), (0.5, 1.0), 5),
    ((1.0, -1.5), (2.0, -2.5), 1),
    ((3.0, 4.0), (4.0, 3.0), 6),
]


def _bounds_by_hand(a_list, b_list, m):
    A = {abs(v) for v in a_list + b_list}
    D = {a * a + b * b for a in a_list for b in b_list}
    n1, n2, l = len(a_list), len(b_list), len(D)
    fine = len(A) * (m // 2 + l + 1) + (m - 1) // 2 + l
    coarse = (n1 + n2) * (m // 2 + n1 * n2 + 1) + (m - 1) // 2 + n1 * n2
    return fine, coarse


def criterion_8():
    t0 = time.perf_counter()
    ok, arith = True, []
    for a, b, m in SYSTEM11_SETS:
        model = System11Model(a, b, m)
        fine, coarse = _bounds_by_hand(a, b, m)
        good = bound_system11(model) == fine and coarse_bound_system11(model) == coarse \
            and fine <= coarse
        ok &= good
        arith.append(fine)
    ok &= bound_system11(System11Model((1.0,), (1.0,), 1)) == 3
    parts = [f"bounds {arith}"]
    for a, b, m in (((1.0,), (1.0,), 2), ((1.0, -2.0), (1.5,), 2), ((1.5,), (), 2),
                    ((1.0, -1.5), (2.0, -2.5), 1)):
        counts = system11_random_counts(a, b, m, 500, seed=80)
        bound = bound_system11(System11Model(a, b, m))
        ok &= max(counts) <= bound
        parts.append(f"a={list(a)} b={list(b)} m={m}: max {max(counts)} <= {bound}")
    dt = time.perf_counter() - t0
    return report(8, "system (11) bounds", ok, "; ".join(parts), dt)


# -- 9 ------------------------------------------------------------------------------

def criterion_9():
    t0 = time.perf_counter()
    parts, ok = [], True
    for name in ("lemma2.9", "prop6.1", "prop6"):
        r = run_suite(name)
        ok &= r.passed
        parts.append(f"{name}: {len(r.checks) - len(r.failures())}/{len(r.checks)}")
    dt = time.perf_counter() - t0
    return report(9, "polynomial shift identities and span equalities", ok, "; ".join(parts), dt)


# -- 10 -----------------------------------------------------------------------------

def criterion_10():
    t0 = time.perf_counter()
    ok, parts = True, []
    for idx, fam in enumerate(remark1_families()):
        c = check_ect(fam, window=(-0.9, 50.0))
        wit = [w for leaf in c.failing() for w in leaf.witnesses if w["kind"] == "sign-change"]
        ok &= c.verdict == "fail" and bool(wit)
        parts.append(f"family {idx + 1}: {c.verdict}, {len(wit)} sign-change witnesses")
    flagged = []
    for m in (2, 3):
        for alpha in range(0, -m, -1):
            spec = family18(lambda t: t, float(alpha), m, interval(0, 0.5), interval(-1, 1))
            h = check_hypothesis_H(spec, 1024)
            e = check_ect(integral_family(spec), 200)
            bad = h.verdict != "pass" and e.verdict != "pass"
            ok &= bad
            flagged.append(f"m={m} alpha={alpha}: {h.verdict}/{e.verdict}")
    parts.append("family (18) " + ", ".join(flagged))
    dt = time.perf_counter() - t0
    return report(10, "negative tests", ok, "; ".join(parts), dt)


# -- 11 -----------------------------------------------------------------------------

def criterion_11():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    w9 = 0.0
    for _ in range(20):
        m = int(rng.integers(1, 4))
        model = System9Model(m, tuple(rng.standard_normal(m + 1)))
        rho = float(rng.uniform(0.02, 0.98))
        a, b = m1_system9(model, rho, "direct"), m1_system9(model, rho, "reduced")
        w9 = max(w9, abs(a - b) / abs(a))
    w10 = 0.0
    for _ in range(10):
        m, n = int(rng.integers(0, 3)), int(rng.integers(1, 4))
        radials = tuple(np.sort(rng.uniform(-PI, PI, n + 1)))
        a_ = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0))
        model = PiecewiseRadialModel(m, a_, radials, rng.standard_normal(mu_size(m, n)))
        rho = float(rng.uniform(0.05, 0.95)) / abs(a_)
        a, b = m1_system10(model, rho), m1_general(system10_equation(model), rho)
        w10 = max(w10, abs(a - b) / abs(a))
    dt = time.perf_counter() - t0
    return report(11, "dual-path Melnikov evaluations", w9 <= 1e-8 and w10 <= 1e-8,
                  f"system (9) worst {w9:.2e} over 20, system (10) worst {w10:.2e} over 10", dt)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


@pytest.mark.parametrize("crit", CRITERIA, ids=[f"criterion_{i + 1}" for i in range(11)])
def test_criterion(crit):
    assert crit()


if __name__ == "__main__":
    results = []
    for crit in CRITERIA:
        try:
            results.append(crit())
        except Exception as exc:  # report and continue with the next criterion
            print(f"{crit.__name__} FAIL: {type(exc).__name__}: {exc}")
            results.append(False)
    sys.exit(0 if all(results) else 1)
