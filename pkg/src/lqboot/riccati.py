"""Discrete algebraic Riccati equation by fixed-point iteration.

For ``theta = [A | B]`` the Riccati operator is

    G(P) = Qx + A'PA - A'PB (B'PB + Qu)^{-1} B'PA

and iterating it from ``P = 0`` converges to the stabilizing solution
``K`` whenever the pair (A, B) is stabilizable. The optimal feedback is
``L = -(B'KB + Qu)^{-1} B'KA``.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import as_matrix, as_square
from .model import CostPair, extended_gain

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000
# Iterates past this norm cannot be heading to a fixed point.
_BLOWUP = 1e15


@dataclass(frozen=True, eq=False)
class ControlSolution:
    K: np.ndarray
    L: np.ndarray
    M: np.ndarray
    iterations: int
    residual: float


@dataclass(frozen=True)
class StabilizabilityReport:
    stabilizable: bool
    spectral_radius_closed_loop: float
    reason: str  # "converged" | "max_iterations" | "unstable_closed_loop"


class RiccatiError(ArithmeticError):
    """No stabilizing Riccati solution; ``report`` says why."""

    def __init__(self, report):
        super().__init__(f"Riccati solve failed: {report.reason} "
                         f"(closed-loop radius {report.spectral_radius_closed_loop:.4g})")
        self.report = report


def _split(theta, costs):
    p = costs.Qx.shape[0]
    theta = as_matrix(theta, shape=(p, p + costs.Qu.shape[0]), name="theta")
    return theta[:, :p], theta[:, p:]


def _apply(A, B, Qx, Qu, P):
    PA = P @ A
    BtPA = B.T @ PA
    X = Qx + A.T @ PA - BtPA.T @ np.linalg.solve(B.T @ P @ B + Qu, BtPA)
    return 0.5 * (X + X.T)


def riccati_operator(theta, costs, P):
    A, B = _split(theta, costs)
    P = as_square(P, A.shape[0], name="P")
    return _apply(A, B, costs.Qx, costs.Qu, P)


def feedback_gain(theta, costs, K):
    A, B = _split(theta, costs)
    return -np.linalg.solve(B.T @ K @ B + costs.Qu, B.T @ K @ A)


def spectral_radius(M):
    M = as_square(M, name="matrix")
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def riccati_iterates(theta, costs, n):
    """First ``n`` iterates ``P_1 .. P_n`` from ``P_0 = 0``."""
    A, B = _split(theta, costs)
    P = np.zeros_like(costs.Qx)
    out = []
    for _ in range(n):
        P = _apply(A, B, costs.Qx, costs.Qu, P)
        out.append(P)
    return out


def solve_riccati(theta, costs, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Stabilizing solution of the Riccati equation for ``theta``.

    Raises :class:`RiccatiError` when the iteration fails to converge or the
    resulting gain does not stabilize ``A + BL``.
    """
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be positive and max_iter >= 1")
    A, B = _split(theta, costs)
    Qx, Qu = costs.Qx, costs.Qu
    P = np.zeros_like(Qx)
    converged = False
    for k in range(1, max_iter + 1):
        nxt = _apply(A, B, Qx, Qu, P)
        gap = np.linalg.norm(nxt - P)
        P = nxt
        if gap <= tol:
            converged = True
            break
        if not np.isfinite(gap) or gap > _BLOWUP:
            break
    if not converged or not np.all(np.isfinite(P)):
        rho = spectral_radius(A) if np.all(np.isfinite(A)) else np.inf
        raise RiccatiError(StabilizabilityReport(False, rho, "max_iterations"))
    L = -np.linalg.solve(B.T @ P @ B + Qu, B.T @ P @ A)
    rho = spectral_radius(A + B @ L)
    if rho >= 1:
        raise RiccatiError(StabilizabilityReport(False, rho, "unstable_closed_loop"))
    residual = float(np.linalg.norm(P - _apply(A, B, Qx, Qu, P)))
    return ControlSolution(K=P, L=L, M=extended_gain(L), iterations=k, residual=residual)


def is_stabilizable(theta, costs, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    try:
        sol = solve_riccati(theta, costs, tol, max_iter)
    except RiccatiError as exc:
        return exc.report
    A, B = _split(theta, costs)
    return StabilizabilityReport(True, spectral_radius(A + B @ sol.L), "converged")


class LinearQuadraticRegulator(BaseEstimator):
    """Certainty-equivalent regulator: ``fit`` on a dynamics parameter,
    ``predict`` actions ``u = L x`` for rows of states."""

    def __init__(self, Qx, Qu, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
        self.Qx = Qx
        self.Qu = Qu
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, theta, y=None):
        costs = CostPair(self.Qx, self.Qu)
        sol = solve_riccati(theta, costs, self.tol, self.max_iter)
        A, B = _split(theta, costs)
        self.solution_ = sol
        self.K_ = sol.K
        self.L_ = sol.L
        self.M_ = sol.M
        self.spectral_radius_ = spectral_radius(A + B @ sol.L)
        return self

    def predict(self, X):
        check_is_fitted(self, "L_")
        X = as_matrix(X, shape=(None, self.L_.shape[1]), name="X")
        return X @ self.L_.T
