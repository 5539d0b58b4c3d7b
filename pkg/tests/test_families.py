import math
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import simpson

from chebmel import families as fm
from chebmel.errors import AdmissibilityError, PoleError, UsageError
from chebmel.families import (CSAlphaSpec, CSPiece, IntegralFamilySpec, IntegralPiece,
                              PowerFamilySpec, TrigIntegralSpec, chebpoly_expand, cs_alpha,
                              cs_trig, eval_integral_family, make_cs_family, make_power_family,
                              make_trig_family, parse_family, remark1_families, t_polynomial)
from chebmel.numeric import jet as jm
from chebmel.numeric.interval import interval

PI = math.pi
FINE = np.linspace(0.0, PI, 1_000_001)


def one_piece(weight, kernel, E=(0.0, 0.5), U=(-1.0, 1.0)):
    return IntegralFamilySpec((IntegralPiece(interval(*E), (weight,), kernel),), interval(*U))


# -- general integral family ----------------------------------------------------------

def test_integral_family_trivial_values():
    spec = one_piece(lambda t: 1.0 + 0.0 * t, lambda t, y: jm.power(1.0 - y * t, -1.0))
    assert eval_integral_family(spec, 0, 0, 0.0) == pytest.approx(0.5, abs=1e-13)
    assert eval_integral_family(spec, 0, 0, 0.0, deriv=1) == pytest.approx(0.125, abs=1e-13)


def test_integral_family_against_fine_grid():
    spec = one_piece(lambda t: t, lambda t, y: jm.power(1.0 - y * t, -0.5))
    t = np.linspace(0.0, 0.5, 1_000_001)
    oracle = simpson(t / np.sqrt(1.0 - 0.4 * t), x=t)
    assert eval_integral_family(spec, 0, 0, 0.4) == pytest.approx(oracle, abs=1e-8)


def test_integral_family_bad_index():
    spec = one_piece(lambda t: t, lambda t, y: jm.power(1.0 - y * t, -0.5))
    with pytest.raises(UsageError):
        eval_integral_family(spec, 0, 3, 0.1)


# -- C / S integrals ---------------------------------------------------------------

def test_cs_trig_examples():
    E = interval(0, PI)
    assert cs_trig(TrigIntegralSpec(E, 0), 0.0, "cos") == pytest.approx(PI, rel=1e-13)
    assert cs_trig(TrigIntegralSpec(E, 1), 0.0, "sin") == pytest.approx(2.0, rel=1e-13)
    assert cs_trig(TrigIntegralSpec(E, 0), 0.5, "cos") == pytest.approx(2 * PI / math.sqrt(3),
                                                                        rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.95, 0.95))
def test_cs_trig_poisson_kernel(y):
    got = cs_trig(TrigIntegralSpec(interval(0, PI), 0), y, "cos")
    assert got == pytest.approx(PI / math.sqrt(1 - y * y), rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 0.95), st.integers(0, 3))
def test_cs_trig_even_in_y_with_sin_squared_weight(y, k):
    spec = TrigIntegralSpec(interval(0, PI), 2 * k, xi=lambda t: jm.sin(t) ** 2)
    assert abs(cs_trig(spec, y, "cos") - cs_trig(spec, -y, "cos")) <= 1e-9


def test_cs_trig_rejects_vanishing_weight():
    with pytest.raises(UsageError):
        TrigIntegralSpec(interval(0, PI), 1, xi=jm.cos)


def test_cs_alpha_examples():
    E = interval(0, PI)
    assert cs_alpha(CSAlphaSpec(E, 0, 0.0), 0.3) == pytest.approx(PI, rel=1e-13)
    assert cs_alpha(CSAlphaSpec(E, 0, 1.0), 2.0, "sin") == pytest.approx(math.log(3), rel=1e-12)
    oracle = simpson(np.cos(FINE) / (2.0 - np.cos(FINE)), x=FINE)
    got = cs_alpha(CSAlphaSpec(E, 1, 1.0), 2.0, "cos")
    assert got == pytest.approx(oracle, abs=1e-8)
    # cos/(2 - cos) = 2/(2 - cos) - 1
    assert got == pytest.approx(2 * PI / math.sqrt(3) - PI, rel=1e-12)


def test_cs_alpha_pole_and_range():
    with pytest.raises(PoleError):
        cs_alpha(CSAlphaSpec(interval(0, PI), 0, 1.0), 0.5)
    with pytest.raises(UsageError):
        CSAlphaSpec(interval(0, 4.0), 0, 1.0)
    # y = 0.9 is outside cos((pi/2, pi)) = (-1, 0)
    assert cs_alpha(CSAlphaSpec(interval(PI / 2, PI), 0, 1.0), 0.9) > 0


def test_cs_alpha_warns_near_unit_for_large_alpha():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        cs_alpha(CSAlphaSpec(interval(0, PI / 2), 0, 2.0), -1.0 - 1e-7)
    assert any(issubclass(x.category, RuntimeWarning) for x in w)


# -- T-polynomials and Chebyshev expansion ------------------------------------------------

@pytest.mark.parametrize("y", [-3.0, 0.0, 1.5, 7.0])
def test_t_polynomial_examples(y):
    E = interval(0, PI)
    assert t_polynomial(E, 0, -1, y) == 0.0
    assert t_polynomial(E, 1, 0, y) == pytest.approx(-2.0, rel=1e-13)
    assert t_polynomial(E, 0, 0, y) == pytest.approx(-PI, rel=1e-13)


def test_t_polynomial_rejects_bad_arguments():
    with pytest.raises(UsageError):
        t_polynomial(interval(0, PI), 2, 0, 1.0)
    with pytest.raises(UsageError):
        t_polynomial(interval(0, PI), 0, -2, 1.0)


def test_t_polynomial_cache_under_threads():
    E = interval(0.1, 2.9)
    fm._moment_cache.clear()
    serial = [t_polynomial(E, k % 2, 5, 2.5) for k in range(2)]
    fm._moment_cache.clear()
    with ThreadPoolExecutor(8) as ex:
        got = list(ex.map(lambda k: t_polynomial(E, k % 2, 5, 2.5), range(64)))
    for k, v in enumerate(got):
        assert v == serial[k % 2]


def test_chebpoly_examples():
    assert chebpoly_expand(0) == (1,)
    assert chebpoly_expand(1) == (0, 1)
    assert chebpoly_expand(2) == (-1, 0, 2)
    assert chebpoly_expand(3) == (0, -3, 0, 4)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10), st.floats(0.0, PI))
def test_chebpoly_reconstruction(k, th):
    c = chebpoly_expand(k)
    assert abs(math.cos(k * th) - sum(ci * math.cos(th) ** i for i, ci in enumerate(c))) <= 1e-12


# -- trigonometric and C/S families ---------------------------------------------------

def test_trig_family_orderings():
    assert make_trig_family("cos-full", 2).labels == ("1", "cos(1t)", "cos(2t)")
    assert make_trig_family("sin-full", 3).labels == ("sin(1t)", "sin(2t)", "sin(3t)")
    assert make_trig_family("cos-parity", 1, k=1).labels == ("cos(1t)", "cos(3t)")
    assert make_trig_family("mixed-full", 2).labels == \
        ("1", "cos(1t)", "cos(2t)", "sin(2t)", "sin(1t)")
    # k = 0 drops sin(0t), the identically zero member
    assert make_trig_family("sin-parity", 2, k=0).labels == ("sin(2t)", "sin(4t)")
    assert make_trig_family("mixed-parity", 1, k=1).labels == \
        ("cos(1t)", "cos(3t)", "sin(3t)", "sin(1t)")


def test_trig_family_domains_and_values():
    f = make_trig_family("cos-full", 2)
    assert (f.domain.lo, f.domain.hi) == (0.0, PI)
    assert make_trig_family("sin-parity", 1, k=1).domain.hi == pytest.approx(PI / 2)
    v = f.values(np.array([0.3]))
    assert np.allclose(v[:, 0], [1.0, math.cos(0.3), math.cos(0.6)])


def test_trig_family_unknown_kind():
    with pytest.raises(UsageError):
        make_trig_family("tan-full", 2)
    with pytest.raises(UsageError):
        make_trig_family("cos-full", 0)


def test_cs_family_labels_keep_gaps():
    E0 = interval(0.1, 1.0)
    fam = make_cs_family("eq5-mixed", [CSPiece(E0, 2, a=1, b=0)])
    assert fam.labels == ("C[E0]_0", "C[E0]_1", "C[E0]_2")
    fam = make_cs_family("eq6-sin", [CSPiece(E0, 2, k=0)])
    assert fam.labels == ("S[E0]_2", "S[E0]_4")
    v = fam.values(np.array([0.2]))[:, 0]
    ref = cs_trig(TrigIntegralSpec(E0, 4), 0.2, "sin")
    assert v[1] == pytest.approx(ref, rel=1e-13)


def test_cs_family_admissibility():
    with pytest.raises(AdmissibilityError):
        make_cs_family("eq5-sin", [CSPiece(interval(0, 1), 1)], alpha=-1.0)
    with pytest.raises(AdmissibilityError):
        make_cs_family("eq6-mixed", [CSPiece(interval(1.0, 2.0), 1)])
    with pytest.raises(AdmissibilityError):
        make_cs_family("eq5-mixed", [CSPiece(interval(0, 1), 1, a=0, b=1)])


# -- power families -------------------------------------------------------------------

def test_power_family_basic():
    f = make_power_family(PowerFamilySpec((1,), (0,), 0, -0.5))
    assert len(f) == 2
    v = f.values(np.array([3.0]))[:, 0]
    assert np.allclose(v, [1.0, 0.5])
    assert f.domain.lo == -1.0 and math.isinf(f.domain.hi)


def test_power_family_without_polynomial_block():
    f = make_power_family(PowerFamilySpec((2, 1), (1, 1), -1, -1.5))
    assert len(f) == 4
    assert not any(lbl.startswith("y^0") and "(" not in lbl for lbl in f.labels)


def test_remark1_needs_the_negative_flag():
    with pytest.raises(AdmissibilityError):
        PowerFamilySpec((4, 1), (3, 0), -1, 1.5)
    spec = PowerFamilySpec((4, 1), (3, 0), -1, 1.5, negative_test=True)
    assert spec.admissibility_problems()
    f1, f2 = remark1_families()
    assert len(f1) == 5 and len(f2) == 5


def test_power_family_bad_shapes():
    with pytest.raises(UsageError):
        PowerFamilySpec((1, 2), (0, 0), 0, -0.5)
    with pytest.raises(UsageError):
        PowerFamilySpec((2, 1), (0, 1), 0, -0.5)
    with pytest.raises(UsageError):
        PowerFamilySpec((1,), (0,), -2, -0.5)


# -- mini-language ---------------------------------------------------------------------

def test_parse_family_documents():
    f = parse_family({"kind": "trig", "variant": "mixed-full", "m": 3})
    assert len(f) == 7
    p = parse_family({"kind": "power", "a": [4, 1], "m": [3, 0], "m0": -1, "beta": 1.5,
                      "negative_test": True})
    assert len(p) == 5
    with pytest.raises(AdmissibilityError):
        parse_family({"kind": "power", "a": [4, 1], "m": [3, 0], "m0": -1, "beta": 1.5})
