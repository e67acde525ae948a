"""Closed-form ridge regression with an unpenalized intercept."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, NumericError

_COND_LIMIT = 1e12


@dataclass
class RidgeModel:
    weights: np.ndarray
    intercept: float
    penalty: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return X @ self.weights + self.intercept

    def to_dict(self) -> dict:
        return {
            "kind": "ridge",
            "weights": [float(w) for w in self.weights],
            "intercept": float(self.intercept),
            "penalty": float(self.penalty),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RidgeModel":
        return cls(np.asarray(d["weights"], dtype=float), float(d["intercept"]), float(d["penalty"]))


def fit_ridge(X, y, penalty: float = 1.0) -> RidgeModel:
    """Solve (Xc'Xc + penalty*I) w = Xc'yc on centered data.

    When there are more features than rows the equivalent dual system
    (Xc Xc' + penalty*I) alpha = yc, w = Xc' alpha is solved instead.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if X.shape[0] != y.shape[0] or X.shape[0] < 1:
        raise DomainError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    if penalty < 0:
        raise DomainError("penalty must be >= 0")
    x_mean = X.mean(axis=0)
    y_mean = float(y.mean())
    Xc = X - x_mean
    yc = y - y_mean
    n, p = Xc.shape
    if p <= n:
        A = Xc.T @ Xc + penalty * np.eye(p)
        b = Xc.T @ yc
    else:
        A = Xc @ Xc.T + penalty * np.eye(n)
        b = yc
    if np.linalg.cond(A) > _COND_LIMIT:
        raise NumericError("ridge system is singular; use a positive penalty")
    sol = np.linalg.solve(A, b)
    w = sol if p <= n else Xc.T @ sol
    return RidgeModel(w, y_mean - float(x_mean @ w), float(penalty))
