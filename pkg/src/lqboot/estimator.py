"""Least-squares identification of ``theta`` from closed-loop data.

Regressors are the extended-gain images ``z_t = L_t x(t)`` and responses
are the next states ``x(t+1)``, so the model is ``x(t+1) = theta z_t + w``.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_samples

PINV_RCOND = 1e-10


class RegressionData:
    """Regression samples with running Gram and cross-moment sums.

    ``append`` is a rank-one update, so the adaptive loop can grow the data
    one step at a time and only solve when it needs an estimate.
    """

    def __init__(self, p, q, capacity=64):
        self.p = p
        self.q = q
        self._z = np.zeros((capacity, q))
        self._y = np.zeros((capacity, p))
        self._n = 0
        self.gram = np.zeros((q, q))
        self.cross = np.zeros((p, q))

    @classmethod
    def from_arrays(cls, regressors, responses):
        Z = np.asarray(regressors, dtype=float)
        Y = np.asarray(responses, dtype=float)
        if Z.ndim != 2 or Y.ndim != 2:
            raise ValueError("regressors and responses must be 2-D")
        Z = as_samples(Z, Z.shape[1], "regressors")
        Y = as_samples(Y, Y.shape[1], "responses")
        if len(Z) != len(Y):
            raise ValueError(f"{len(Z)} regressors but {len(Y)} responses")
        data = cls(Y.shape[1], Z.shape[1], capacity=max(len(Z), 1))
        data._z[: len(Z)] = Z
        data._y[: len(Y)] = Y
        data._n = len(Z)
        data.gram = Z.T @ Z
        data.cross = Y.T @ Z
        return data

    @classmethod
    def from_trajectory(cls, traj):
        return cls.from_arrays(traj.regressors, traj.responses)

    def append(self, z, y):
        if self._n == len(self._z):
            self._z = np.vstack([self._z, np.zeros_like(self._z)])
            self._y = np.vstack([self._y, np.zeros_like(self._y)])
        self._z[self._n] = z
        self._y[self._n] = y
        self._n += 1
        self.gram += np.outer(z, z)
        self.cross += np.outer(y, z)

    def __len__(self):
        return self._n

    @property
    def regressors(self):
        return self._z[: self._n]

    @property
    def responses(self):
        return self._y[: self._n]


@dataclass(frozen=True, eq=False)
class LseResult:
    theta_hat: np.ndarray
    gram: np.ndarray
    rank_deficient: bool


@dataclass(frozen=True, eq=False)
class ResidualDistribution:
    """Residuals, their mean, the centered atoms of the empirical law and
    its covariance ``n^{-1} sum w w' - wbar wbar'``."""

    residuals: np.ndarray
    mean: np.ndarray
    centered_atoms: np.ndarray
    sigma_hat: np.ndarray

    def __len__(self):
        return len(self.residuals)


def gram_matrix(data):
    if len(data) == 0:
        raise ValueError("gram matrix of empty data")
    return data.gram.copy()


def solve_normal_equation(gram, cross, rcond=PINV_RCOND):
    """``theta`` with ``theta @ gram = cross``, minimum norm if ``gram`` is singular.

    Returns ``(theta, rank_deficient)``.
    """
    s = np.linalg.svd(gram, compute_uv=False, hermitian=True)
    deficient = s.size == 0 or s[0] == 0 or bool(s[-1] < rcond * s[0])
    theta = cross @ np.linalg.pinv(gram, rcond=rcond, hermitian=True)
    return theta, deficient


def least_squares(data, rcond=PINV_RCOND):
    if len(data) == 0:
        raise ValueError("least squares needs at least one sample")
    theta, deficient = solve_normal_equation(data.gram, data.cross, rcond)
    return LseResult(theta_hat=theta, gram=data.gram.copy(), rank_deficient=deficient)


def residuals(data, theta_hat):
    Z, Y = data.regressors, data.responses
    theta_hat = np.asarray(theta_hat, dtype=float)
    if theta_hat.shape != (Y.shape[1], Z.shape[1]):
        raise ValueError(f"theta_hat has shape {theta_hat.shape}, expected {(Y.shape[1], Z.shape[1])}")
    res = Y - Z @ theta_hat.T
    mean = res.mean(axis=0)
    centered = res - mean
    sigma = res.T @ res / len(res) - np.outer(mean, mean)
    sigma = 0.5 * (sigma + sigma.T)
    return ResidualDistribution(residuals=res, mean=mean, centered_atoms=centered, sigma_hat=sigma)


class LeastSquaresIdentifier(RegressorMixin, BaseEstimator):
    """sklearn-style wrapper: ``fit(Z, Y)`` on regressors ``z_t`` (rows) and
    responses ``x(t+1)`` (rows); ``coef_`` is the ``(p, q)`` estimate."""

    def __init__(self, rcond=PINV_RCOND):
        self.rcond = rcond

    def fit(self, Z, Y):
        Y = np.asarray(Y, dtype=float)
        data = RegressionData.from_arrays(Z, Y[:, None] if Y.ndim == 1 else Y)
        result = least_squares(data, self.rcond)
        self.coef_ = result.theta_hat
        self.gram_ = result.gram
        self.rank_deficient_ = result.rank_deficient
        self.residual_distribution_ = residuals(data, result.theta_hat)
        self.n_features_in_ = data.q
        return self

    def predict(self, Z):
        check_is_fitted(self, "coef_")
        Z = as_samples(Z, self.n_features_in_, "Z")
        return Z @ self.coef_.T
