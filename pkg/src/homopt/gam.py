"""Additive penalized B-spline (P-spline) regression surrogate.

The model is ``y ~ b0 + sum_j s_j(x_j)`` with one cubic B-spline smooth per
input column. Coefficients solve the penalized least-squares problem

    ||y - b0 - sum_j B_j c_j||^2 + lam * sum_j ||D c_j||^2

where ``D`` is a finite-difference matrix. Each smooth's design columns are
centered so the intercept carries the mean response.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.interpolate import BSpline
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

RIDGE = 1e-10


class GamFitError(ValueError):
    pass


def uniform_knots(lo: float, hi: float, n_splines: int, degree: int) -> np.ndarray:
    """Clamped knot vector with ``n_splines`` basis functions on ``[lo, hi]``."""
    inner = np.linspace(lo, hi, n_splines - degree + 1)
    return np.concatenate([np.full(degree, lo), inner, np.full(degree, hi)])


def difference_matrix(n: int, order: int) -> np.ndarray:
    return np.diff(np.eye(n), n=order, axis=0)


class GamRegressor(RegressorMixin, BaseEstimator):
    """Additive P-spline regressor.

    Parameters
    ----------
    n_splines : int, default=25
        Basis functions per input dimension.
    penalty : float, default=1e-4
        Weight of the difference penalty on each smooth's coefficients.
    spline_degree : int, default=3
    penalty_order : int, default=2
        Order of the coefficient differences being penalized (1, 2 or 3).

    Attributes
    ----------
    intercept_ : float
        Constant term; already includes the centering offsets of every smooth,
        so ``predict`` is ``intercept_ + sum_j spline_j(x_j)``.
    knots_ : list of ndarray
    coef_ : list of ndarray
        Per-dimension spline coefficients (zeros for inactive dimensions).
    train_lo_, train_hi_ : ndarray
        Observed range of each column; inputs are clamped to it.
    active_ : ndarray of bool
        False where the training column was constant.
    """

    def __init__(self, n_splines=25, penalty=1e-4, spline_degree=3, penalty_order=2):
        self.n_splines = n_splines
        self.penalty = penalty
        self.spline_degree = spline_degree
        self.penalty_order = penalty_order

    def _validate_params(self):
        if self.spline_degree < 0 or self.n_splines <= self.spline_degree:
            raise GamFitError("n_splines must exceed spline_degree")
        if not self.penalty >= 0:
            raise GamFitError("penalty must be >= 0")
        if self.penalty_order not in (1, 2, 3):
            raise GamFitError("penalty_order must be 1, 2 or 3")

    def fit(self, X, y):
        self._validate_params()
        try:
            X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        except ValueError as exc:
            raise GamFitError(str(exc)) from exc
        n, d = X.shape
        if n < 2:
            raise GamFitError(f"need at least 2 points, got {n}")

        k, m = self.spline_degree, self.n_splines
        lo, hi = X.min(axis=0), X.max(axis=0)
        active = hi > lo
        D = difference_matrix(m, self.penalty_order)
        DtD = D.T @ D

        blocks, means, knots = [], [], []
        for j in range(d):
            t = uniform_knots(lo[j], hi[j], m, k) if active[j] else None
            knots.append(t)
            if t is None:
                continue
            B = BSpline.design_matrix(X[:, j], t, k).toarray()
            mu = B.mean(axis=0)
            blocks.append(B - mu)
            means.append(mu)

        n_act = len(blocks)
        A = np.hstack([np.ones((n, 1))] + blocks)
        P = np.zeros((A.shape[1], A.shape[1]))
        for b in range(n_act):
            s = 1 + b * m
            P[s:s + m, s:s + m] = self.penalty * DtD
        lhs = A.T @ A + P + RIDGE * np.eye(A.shape[1])
        try:
            theta = np.linalg.solve(lhs, A.T @ y)
        except np.linalg.LinAlgError as exc:
            raise GamFitError(f"singular normal equations: {exc}") from exc
        if not np.all(np.isfinite(theta)):
            raise GamFitError("non-finite coefficients")

        intercept = float(theta[0])
        coefs, b = [], 0
        for j in range(d):
            if not active[j]:
                coefs.append(np.zeros(m))
                continue
            c = theta[1 + b * m:1 + (b + 1) * m]
            intercept -= float(means[b] @ c)
            coefs.append(c.copy())
            b += 1

        self.intercept_ = intercept
        self.coef_ = coefs
        self.knots_ = knots
        self.train_lo_ = lo
        self.train_hi_ = hi
        self.active_ = active
        self.n_features_in_ = d
        self._splines = [BSpline(t, c, k) if t is not None else None for t, c in zip(knots, coefs)]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64, ensure_min_samples=0)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, model was fit on {self.n_features_in_}")
        Xc = np.clip(X, self.train_lo_, self.train_hi_)
        out = np.full(X.shape[0], self.intercept_)
        for j, spl in enumerate(self._splines):
            if spl is not None:
                out += spl(Xc[:, j])
        return out

    def predict_one(self, x) -> float:
        """Scalar prediction for one encoded vector; the hot path of simplex search."""
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.n_features_in_:
            raise ValueError(f"vector of length {x.shape[0]}, model was fit on {self.n_features_in_}")
        total = self.intercept_
        for j, spl in enumerate(self._splines):
            if spl is not None:
                total += float(spl(min(max(x[j], self.train_lo_[j]), self.train_hi_[j])))
        return total

    def to_dict(self) -> dict:
        """Debug dump of the fitted model."""
        check_is_fitted(self, "coef_")
        return {
            "intercept": self.intercept_,
            "params": self.get_params(),
            "dimensions": [
                {
                    "knots": None if t is None else t.tolist(),
                    "coefficients": c.tolist(),
                    "train_lo": float(lo),
                    "train_hi": float(hi),
                    "active": bool(a),
                }
                for t, c, lo, hi, a in zip(self.knots_, self.coef_, self.train_lo_, self.train_hi_, self.active_)
            ],
        }


def fit_gam(X, y, n_splines=25, penalty=1e-4, spline_degree=3, penalty_order=2) -> GamRegressor:
    """Fit a surrogate to encoded points ``X`` and finite losses ``y``."""
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise GamFitError("losses must be finite")
    model = GamRegressor(n_splines, penalty, spline_degree, penalty_order)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    return model.fit(X, y)


@dataclass(frozen=True)
class GamConfig:
    n_splines: int = 25
    penalty: float = 1e-4
    spline_degree: int = 3
    penalty_order: int = 2

    def __post_init__(self):
        GamRegressor(**asdict(self))._validate_params()

    def fit(self, X, y) -> GamRegressor:
        return fit_gam(X, y, **asdict(self))
