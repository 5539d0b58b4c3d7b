import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from chebmel.errors import ModelError, UsageError
from chebmel.melnikov import (PI, PiecewiseRadialModel, ReducedCoefficients, System9Model,
                              System11Model, b1_generator_identities, bound_system11,
                              coarse_bound_system11, eq32_sides, m1_general, m1_system9,
                              m1_system10, m1_system11, mth_derivative_reduced, mu_labels,
                              mu_size, MelnikovEquationSpec, prop8_analyze, prop8_bound,
                              reduce_to_B2, reduced_m1, sector_pieces, system9_equation,
                              system9_perturbation, system9_random_counts, system9_realize,
                              system10_equation, system11_random_counts, system11_sets)
from chebmel.numeric.interval import interval
from chebmel.zeros import count_zeros


# -- general evaluator ----------------------------------------------------------------

def _spec(L, x0=lambda t, rho: rho + 0.0 * t):
    return MelnikovEquationSpec(lambda t, x: x + 0.0 * t, (-PI, PI), (L,), x0)


def test_general_cosine_vanishes():
    assert abs(m1_general(_spec(lambda t, x: np.cos(t) + 0.0 * x), 0.4)) < 1e-14


def test_general_linear():
    assert m1_general(_spec(lambda t, x: x), 0.3) == pytest.approx(2 * PI * 0.3, rel=1e-13)


def test_general_checks_first_integral():
    with pytest.raises(ModelError):
        m1_general(_spec(lambda t, x: x, x0=lambda t, rho: rho * (1.1 + np.sin(t))), 0.3)


def test_general_rejects_bad_sectors():
    with pytest.raises(UsageError):
        MelnikovEquationSpec(lambda t, x: x, (0.0, PI), (lambda t, x: x,), lambda t, r: r)


@pytest.mark.parametrize("rho", [0.2, 0.5, 0.8])
def test_general_matches_system9(rho):
    model = System9Model(1, (0.7, -1.3))
    eq = system9_equation(1, *system9_perturbation(model))
    ref = m1_system9(model, rho)
    assert abs(m1_general(eq, rho) - ref) <= 1e-8 * abs(ref)


# -- system (9) ------------------------------------------------------------------------

def test_system9_positive_for_leading_coefficient():
    for m in (1, 2, 3):
        lam = (1.0,) + (0.0,) * m
        rho = np.linspace(0.01, 0.99, 200)
        v = m1_system9(System9Model(m, lam), rho)
        assert np.all(v > 0)
        assert count_zeros(lambda r: m1_system9(System9Model(m, lam), r),
                           interval(0.01, 0.99)).count == 0


def test_system9_leading_order_near_origin():
    # M1 / rho^(2m-1) -> 2 * int_0^pi sin^2 = pi
    m = 2
    rho = 1e-3
    v = m1_system9(System9Model(m, (1.0, 0.0, 0.0)), rho)
    assert v / rho ** (2 * m - 1) == pytest.approx(PI, rel=1e-8)


def test_system9_paths_agree_on_random_configurations():
    rng = np.random.default_rng(9)
    for _ in range(20):
        m = int(rng.integers(1, 4))
        model = System9Model(m, tuple(rng.standard_normal(m + 1)))
        rho = float(rng.uniform(0.02, 0.98))
        a = m1_system9(model, rho, "direct")
        b = m1_system9(model, rho, "reduced")
        assert abs(a - b) <= 1e-8 * max(abs(a), 1e-300)


def test_system9_change_of_variable():
    rng = np.random.default_rng(4)
    for m in (1, 2, 3):
        model = System9Model(m, tuple(rng.standard_normal(m + 1)))
        for rho in (0.15, 0.5, 0.85):
            a = m1_system9(model, rho, "direct")
            b = m1_system9(model, rho, "original")
            assert abs(a - b) <= 1e-8 * abs(a)


def test_system9_bad_inputs():
    with pytest.raises(UsageError):
        System9Model(2, (1.0, 2.0))
    with pytest.raises(UsageError):
        m1_system9(System9Model(1, (1.0, 0.0)), 1.2)
    with pytest.raises(UsageError):
        m1_system9(System9Model(1, (1.0, 0.0)), 0.5, path="sideways")


@pytest.mark.parametrize("m", [1, 2, 3])
def test_system9_realization_and_random_draws(m):
    lam, rep = system9_realize(m)
    assert rep.count == m and rep.all_simple
    assert max(system9_random_counts(m, 40, seed=m)) <= m


# -- system (11) -----------------------------------------------------------------------

def test_system11_bound_example():
    model = System11Model((1.0,), (1.0,), 1)
    assert system11_sets(model)[2] == 1
    assert bound_system11(model) == 3
    # |a_1| = |b_1| collapses A to one value; the coarse bound counts n1 + n2 = 2
    assert coarse_bound_system11(model) == 2 * (0 + 1 + 1) + 0 + 1


def test_system11_bound_merges_equal_values():
    # |a| = |b| = 2 counted once in A; 2^2 + 3^2 and 3^2 + 2^2 collide in D
    model = System11Model((2.0, -3.0), (3.0, 2.0), 2)
    A, D, l = system11_sets(model)
    assert A == [2.0, 3.0] and l == 3
    assert bound_system11(model) == 2 * (1 + 3 + 1) + 0 + 3
    assert coarse_bound_system11(model) == 4 * (1 + 4 + 1) + 0 + 4


def test_system11_zero_perturbation():
    model = System11Model((1.0,), (1.5,), 2)
    assert np.all(np.asarray(m1_system11(model, np.linspace(0.05, 0.95, 7))) == 0)


def test_system11_against_scipy_quad():
    rng = np.random.default_rng(1)
    a_list, b_list, m = (1.2, -2.0), (1.5,), 2
    P, Q = rng.standard_normal((3, 3)), rng.standard_normal((3, 3))
    P[np.add.outer(range(3), range(3)) > m] = 0
    Q[np.add.outer(range(3), range(3)) > m] = 0
    model = System11Model(a_list, b_list, m, P, Q)

    def integrand(t, rho):
        x, y = rho * math.cos(t), rho * math.sin(t)
        p = sum(P[i, j] * x ** i * y ** j for i in range(3) for j in range(3))
        q = sum(Q[i, j] * x ** i * y ** j for i in range(3) for j in range(3))
        den = math.prod(x - a for a in a_list) * math.prod(y - b for b in b_list)
        return (p * math.cos(t) + q * math.sin(t)) / den

    for rho in (0.1, 0.6, 1.1):
        oracle = quad(integrand, -PI, PI, args=(rho,), epsabs=1e-13, epsrel=1e-12)[0]
        assert m1_system11(model, rho) == pytest.approx(oracle, rel=1e-9, abs=1e-12)


def test_system11_outside_annulus():
    with pytest.raises(ModelError):
        m1_system11(System11Model((1.0,), (1.0,), 1, [[1, 0], [0, 0]]), 1.5)


def test_system11_random_counts_within_bound():
    counts = system11_random_counts((1.0,), (1.0,), 1, 100, seed=2)
    assert max(counts) <= 3


# -- system (10) ----------------------------------------------------------------------

def _random_model(rng, m=None):
    m = int(rng.integers(0, 3)) if m is None else m
    n = int(rng.integers(1, 4))
    radials = np.sort(rng.uniform(-PI, PI, n + 1))
    a = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0))
    return PiecewiseRadialModel(m, a, tuple(radials), rng.standard_normal(mu_size(m, n)))


def test_system10_zero_mu():
    model = PiecewiseRadialModel(1, 1.0, (-PI / 2, PI / 2))
    assert m1_system10(model, 0.4) == 0.0


def test_system10_single_cosine_coefficient_positive():
    labels = mu_labels(1, 1)
    mu = np.zeros(len(labels))
    mu[labels.index((0, "c", 0, 1))] = 2.0
    model = PiecewiseRadialModel(1, 1.0, (-PI / 2, PI / 2), mu)
    rho = np.linspace(0.01, 0.99, 100)
    v = np.asarray(m1_system10(model, rho))
    assert np.all(v > 0)
    # c * rho * int_{E_0} 1 / (1 - a rho cos)
    th = interval(-PI / 2, PI / 2)
    ref = 2.0 * 0.5 * quad(lambda t: 1 / (1 - 0.5 * math.cos(t)), th.lo, th.hi)[0]
    assert m1_system10(model, 0.5) == pytest.approx(ref, rel=1e-10)


def test_system10_matches_general_encoding():
    rng = np.random.default_rng(10)
    for _ in range(10):
        model = _random_model(rng)
        rho = float(rng.uniform(0.05, 0.95)) / abs(model.a)
        a = m1_system10(model, rho)
        b = m1_general(system10_equation(model), rho)
        assert abs(a - b) <= 1e-8 * max(abs(a), 1e-300)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.floats(-3.1, 3.1))
def test_sector_additivity(seed, cut):
    model = _random_model(np.random.default_rng(seed))
    rho = 0.5 / abs(model.a)
    a = m1_system10(model, rho)
    b = m1_system10(model, rho, breaks=(cut,))
    assert abs(a - b) <= 2e-12 * max(1.0, abs(a))


def test_wrapping_sector_is_split():
    pieces = sector_pieces((-2.0, 1.0))
    assert [(p.lo, p.hi) for p in pieces[1]] == [(1.0, PI), (-PI, -2.0)]


# -- reduction to the B2 span --------------------------------------------------------------

def test_reduce_zero_mu():
    c = reduce_to_B2(PiecewiseRadialModel(1, 1.0, (-PI / 2, PI / 2)))
    assert c.residual == 0.0 and not np.any(c.vector())


def test_reduce_membership_and_holdout():
    rng = np.random.default_rng(6)
    for a in (1.0, -0.7):
        model = PiecewiseRadialModel(1, a, (-PI / 2, PI / 2), rng.standard_normal(mu_size(1, 1)))
        c = reduce_to_B2(model)
        assert c.residual <= 1e-6
        y = math.copysign(1.0, a) * rng.uniform(1.01, 40.0, 20)
        direct = np.asarray(reduced_m1(model, y))
        assert np.max(np.abs(c.evaluate(y) - direct)) <= 1e-6 * c.scale


def test_reduce_rejects_bad_grid():
    model = PiecewiseRadialModel(1, 1.0, (-PI / 2, PI / 2), np.ones(mu_size(1, 1)))
    with pytest.raises(UsageError):
        reduce_to_B2(model, grid=np.linspace(0.5, 3, 40))


def _single_eta():
    secs = sector_pieces((-PI / 2, PI / 2))
    return ReducedCoefficients(np.zeros(1), [np.array([1.0, 0.0]), np.zeros(2)],
                               [np.zeros(1), np.zeros(1)], 0.0, 1, 1.0, secs, 1.0)


def test_mth_derivative_examples():
    zero = _single_eta()
    zero.eta = [np.zeros(2), np.zeros(2)]
    assert mth_derivative_reduced(zero, 2.0) == 0.0
    c = _single_eta()
    for y in (1.3, 2.0, 7.5):
        h = 1e-4
        fd = (c.evaluate(y + h) - c.evaluate(y - h)) / (2 * h)
        assert mth_derivative_reduced(c, y) == pytest.approx(fd, rel=1e-4)


def test_eq32_dual_representation():
    rng = np.random.default_rng(32)
    for m in (1, 2):
        model = PiecewiseRadialModel(m, 1.0, (-PI / 2, PI / 2), rng.standard_normal(mu_size(m, 1)))
        c = reduce_to_B2(model)
        for y in rng.uniform(1.05, 20.0, 10):
            lhs, rhs = eq32_sides(c, y)
            assert abs(lhs - rhs) <= 1e-6 * max(1.0, abs(lhs))


@pytest.mark.parametrize("m", [0, 1, 2])
def test_b1_generators_reduce_to_b2(m):
    for E in (interval(0, PI), interval(-PI / 2, PI / 4)):
        for y in (1.5, 4.0):
            for label, lhs, rhs in b1_generator_identities(m, E, y):
                assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(lhs)), label


# -- Proposition 8 -------------------------------------------------------------------------

def test_prop8_bound_table():
    assert [prop8_bound(c, 1) for c in ("i", "ii", "iii", "iv")] == [4, 5, 6, 6]
    assert [prop8_bound(c, 2) for c in ("i", "ii", "iii", "iv")] == [5, 7, 9, 9]
    assert prop8_bound("vi", 2, (-PI / 2, PI / 2)) == 9


def test_prop8_bound_case_v_and_errors():
    # n = 2, m = 1: 2 * (1 + 0 + 2) + 1 + 1
    assert prop8_bound("v", 1, (-PI, PI / 4, PI / 2)) == 8
    with pytest.raises(UsageError):
        prop8_bound("v", 1, (-PI, 0.0, PI / 2))
    with pytest.raises(UsageError):
        prop8_bound("i", 1, (0.0, 1.0))
    with pytest.raises(UsageError):
        prop8_bound("vii", 1)


@pytest.mark.parametrize("case,bound", [("i", 4), ("ii", 5)])
def test_prop8_analyze_realizes_bound(case, bound):
    r = prop8_analyze(case, 1, trials=30)
    assert r.bound == bound
    assert r.realized_count == bound and r.realized_simple
    assert r.max_random_count <= bound
    assert r.passed


def test_zero_mu_has_no_zeros():
    model = PiecewiseRadialModel(1, 1.0, (-PI / 2, PI / 2))
    r = count_zeros(lambda x: m1_system10(model, x), interval(0.01, 0.99))
    assert r.total_with_multiplicity == 0 and r.identically_zero
