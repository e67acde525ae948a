"""Pearson correlation, univariate OLS F-test and MAE without scipy.

The F-test p-value uses the regularized incomplete beta function,
evaluated with the modified Lentz continued fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, NumericError, UndefinedStatisticError

BETA_TOL = 1e-12
BETA_MAX_ITER = 300
_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < BETA_TOL:
            return h
    raise NumericError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise DomainError("betainc needs a > 0 and b > 0")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"betainc needs 0 <= x <= 1, got {x}")
    if x == 0.0 or x == 1.0:
        return x
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_cdf(f: float, d1: float, d2: float) -> float:
    if f <= 0:
        return 0.0
    if math.isinf(f):
        return 1.0
    return betainc(d1 / 2.0, d2 / 2.0, d1 * f / (d1 * f + d2))


def f_sf(f: float, d1: float, d2: float) -> float:
    """Upper tail P(F > f); computed directly to keep small p-values accurate."""
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))


def _as_pair(x: Sequence[float], y: Sequence[float], min_n: int) -> tuple[np.ndarray, np.ndarray]:
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.ndim != 1 or xa.shape != ya.shape:
        raise DomainError(f"x and y must be 1-D and equally long ({xa.shape} vs {ya.shape})")
    if len(xa) < min_n:
        raise DomainError(f"need at least {min_n} observations, got {len(xa)}")
    if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(ya))):
        raise DomainError("x and y must be finite")
    return xa, ya


def _centered_sums(xa: np.ndarray, ya: np.ndarray) -> tuple[float, float, float]:
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    return float(dx @ dx), float(dy @ dy), float(dx @ dy)


def pearson_r(x: Sequence[float], y: Sequence[float]) -> float:
    xa, ya = _as_pair(x, y, 2)
    sxx, syy, sxy = _centered_sums(xa, ya)
    if sxx == 0 or syy == 0:
        raise UndefinedStatisticError("Pearson r is undefined when either variable is constant")
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class RegressionReport:
    slope: float
    intercept: float
    r: float
    F: float
    df: tuple[int, int]
    p: float
    n: int
    perfect_fit: bool = False

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r": self.r,
            "F": self.F,
            "df1": self.df[0],
            "df2": self.df[1],
            "p": self.p,
            "n": self.n,
            "perfect_fit": self.perfect_fit,
        }


def f_test_univariate(x: Sequence[float], y: Sequence[float]) -> RegressionReport:
    """OLS fit of y on x with the overall F-test of the slope."""
    xa, ya = _as_pair(x, y, 3)
    n = len(xa)
    sxx, syy, sxy = _centered_sums(xa, ya)
    if sxx == 0:
        raise UndefinedStatisticError("regressor x is constant")
    if syy == 0:
        raise UndefinedStatisticError("response y is constant; correlation is undefined")
    slope = sxy / sxx
    intercept = float(ya.mean() - slope * xa.mean())
    r = max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))
    df = (1, n - 2)
    resid = ya - (intercept + slope * xa)
    sse = float(resid @ resid)
    if abs(r) == 1.0 or sse <= 1e-24 * syy:
        return RegressionReport(slope, intercept, math.copysign(1.0, r), math.inf, df, 0.0, n, True)
    F = r * r * (n - 2) / (1.0 - r * r)
    return RegressionReport(slope, intercept, r, F, df, f_sf(F, *df), n)


def mae(pred: Sequence[float], truth: Sequence[float]) -> float:
    p = np.asarray(pred, dtype=float)
    t = np.asarray(truth, dtype=float)
    if p.shape != t.shape or p.ndim != 1:
        raise DomainError(f"pred and truth lengths differ ({p.shape} vs {t.shape})")
    if len(p) == 0:
        raise DomainError("mae needs at least one value")
    return float(np.mean(np.abs(p - t)))
