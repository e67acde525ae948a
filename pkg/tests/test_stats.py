import math
import random

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from beliefbox.errors import DomainError, UndefinedStatisticError
from beliefbox.stats import betainc, f_cdf, f_sf, f_test_univariate, mae, pearson_r


@pytest.mark.parametrize(
    "a, b, x", [(0.5, 0.5, 0.3), (1, 1, 0.42), (2.5, 7, 0.1), (10, 3, 0.9), (0.5, 24, 0.999), (50, 50, 0.5)]
)
def test_betainc_matches_mpmath(a, b, x):
    ref = float(mpmath.betainc(a, b, 0, x, regularized=True))
    assert betainc(a, b, x) == pytest.approx(ref, rel=1e-12, abs=1e-15)


def test_betainc_edges():
    assert betainc(2, 3, 0.0) == 0.0 and betainc(2, 3, 1.0) == 1.0
    with pytest.raises(DomainError):
        betainc(0, 1, 0.5)
    with pytest.raises(DomainError):
        betainc(1, 1, 1.5)


@pytest.mark.parametrize("f, d1, d2", [(0.5, 1, 10), (3.0, 1, 48), (12.0, 2, 5), (80.0, 1, 198)])
def test_f_tail_matches_quadrature(f, d1, d2):
    sf = float(oracles.f_sf_quadrature(f, d1, d2))
    assert f_sf(f, d1, d2) == pytest.approx(sf, rel=1e-9, abs=1e-15)
    assert f_cdf(f, d1, d2) == pytest.approx(float(oracles.f_cdf_quadrature(f, d1, d2)), abs=1e-10)


def test_f_tail_limits():
    assert f_sf(0, 1, 5) == 1.0 and f_sf(math.inf, 1, 5) == 0.0
    assert f_cdf(-1, 1, 5) == 0.0 and f_cdf(math.inf, 1, 5) == 1.0


@pytest.mark.parametrize("seed", range(12))
def test_regression_matches_textbook(seed):
    rng = random.Random(seed)
    n = rng.randint(5, 50)
    x = [rng.uniform(-3, 3) for _ in range(n)]
    y = [0.4 * v + rng.gauss(0, 1) for v in x]
    r, F, p = oracles.ftest_textbook(x, y)
    rep = f_test_univariate(x, y)
    slope, intercept = oracles.ols_textbook(x, y)
    assert pearson_r(x, y) == pytest.approx(r, abs=1e-12)
    assert rep.r == pytest.approx(r, abs=1e-12)
    assert rep.F == pytest.approx(F, rel=1e-9)
    assert rep.p == pytest.approx(p, rel=1e-8, abs=1e-12)
    assert rep.slope == pytest.approx(float(slope), rel=1e-10)
    assert rep.intercept == pytest.approx(float(intercept), abs=1e-10)
    assert rep.df == (1, n - 2) and not rep.perfect_fit


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=3, max_size=30))
def test_pearson_bounded_and_symmetric(pairs):
    x = [p[0] for p in pairs]
    y = [p[1] for p in pairs]
    try:
        r = pearson_r(x, y)
    except UndefinedStatisticError:
        return
    assert -1.0 <= r <= 1.0
    assert pearson_r(y, x) == pytest.approx(r, abs=1e-12)


def test_degenerate_inputs():
    with pytest.raises(UndefinedStatisticError):
        pearson_r([1, 1, 1], [1, 2, 3])
    with pytest.raises(UndefinedStatisticError):
        f_test_univariate([2, 2, 2, 2], [1, 2, 3, 4])
    with pytest.raises(UndefinedStatisticError):
        f_test_univariate([1, 2, 3, 4], [5, 5, 5, 5])
    with pytest.raises(DomainError):
        f_test_univariate([1, 2], [3, 4])
    with pytest.raises(DomainError):
        pearson_r([1, 2, 3], [1, 2])
    with pytest.raises(DomainError):
        pearson_r([1, math.nan, 3], [1, 2, 3])


@pytest.mark.parametrize("sign", [1, -1])
def test_perfect_fit_is_flagged(sign):
    rep = f_test_univariate([1, 2, 3, 4, 5], [sign * (2 * v + 1) for v in (1, 2, 3, 4, 5)])
    assert rep.perfect_fit and rep.F == math.inf and rep.p == 0.0 and rep.r == sign
    assert rep.slope == pytest.approx(2 * sign)


def test_mae():
    assert mae([1, 2, 3], [1, 3, 5]) == 1.0
    with pytest.raises(DomainError):
        mae([], [])
    with pytest.raises(DomainError):
        mae([1], [1, 2])
