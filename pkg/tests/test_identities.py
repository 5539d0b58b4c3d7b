import math

import numpy as np
import pytest

from chebmel.errors import UsageError
from chebmel.identities import (SUITES, SuiteResult, THETA_GRID, _span_check, central_derivative,
                                run_suite, suite_lemma_2_6)


@pytest.fixture(scope="module")
def results():
    return {name: run_suite(name, seed=0) for name in SUITES}


@pytest.mark.parametrize("name", list(SUITES))
def test_suite_passes(results, name):
    r = results[name]
    assert r.checks, name
    assert r.passed, [(c.label, c.residual, c.threshold) for c in r.failures()]


def test_suite_sizes(results):
    assert sum("2x2" in c.label for c in results["lemma2.6"].checks) == 50
    assert sum("3x3" in c.label for c in results["lemma2.6"].checks) == 20
    assert len(results["eq24"].checks) >= 11
    assert len(results["appendixA1"].checks) == 10


def test_suite_is_deterministic():
    a = suite_lemma_2_6(seed=5, n2=5, n3=2).to_dict()
    b = suite_lemma_2_6(seed=5, n2=5, n3=2).to_dict()
    assert a == b


def test_suite_round_trip(results):
    r = results["prop2"]
    back = SuiteResult.from_dict(r.to_dict())
    assert back.to_dict() == r.to_dict()


def test_unknown_suite():
    with pytest.raises(UsageError):
        run_suite("eq99")


def test_span_check_detects_difference():
    c = _span_check("cos vs sin", [lambda t: np.cos(t)], [lambda t: np.sin(t)])
    assert not c.passed and c.detail["rank_union"] == 2
    assert _span_check("same", [np.cos], [lambda t: 3 * np.cos(t)]).passed


def test_central_derivative():
    assert central_derivative(math.exp, 0.3) == pytest.approx(math.exp(0.3), rel=1e-9)
    assert THETA_GRID.size >= 4 * 10
