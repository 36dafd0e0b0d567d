"""Residual bootstrap of the closed-loop least-squares estimate.

Fit ``theta_hat`` to the history, resample its centered residuals, drive a
surrogate system ``x*(t+1) = theta_hat L_t x*(t) + w*(t+1)`` with the same
recorded gains, and re-fit on the surrogate to get ``theta_tilde``.
"""

import logging
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .estimator import RegressionData, least_squares, residuals
from .model import DEFAULT_STATE_CAP, DivergenceError

log = logging.getLogger(__name__)

SOURCES = ("empirical", "gaussian")
RETRY_SCALE = 0.5


@dataclass(frozen=True)
class BootstrapConfig:
    noise_source: str = "empirical"
    rng_seed_offset: int = 0

    def __post_init__(self):
        if self.noise_source not in SOURCES:
            raise ValueError(f"noise_source must be one of {SOURCES}, got {self.noise_source!r}")


@dataclass(frozen=True, eq=False)
class SurrogateRun:
    surrogate_states: np.ndarray
    bootstrap_noises: np.ndarray
    theta_tilde: np.ndarray
    theta_hat: np.ndarray
    residuals: object  # ResidualDistribution
    fallback: bool = False


def make_rng(rng, offset=0):
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return np.random.default_rng()
    return np.random.default_rng([int(rng), int(offset)] if offset else int(rng))


def _psd_root(S):
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


def draw_bootstrap_noise(dist, source, rng, size=None):
    """Draw from the centered empirical law (``"empirical"``) or from
    ``N(0, sigma_hat)`` (``"gaussian"``). Returns a p-vector or ``(size, p)``."""
    if len(dist) == 0:
        raise ValueError("no residuals to resample")
    k = 1 if size is None else size
    if source == "empirical":
        atoms = dist.centered_atoms
        out = atoms[rng.integers(len(atoms), size=k)]
    elif source == "gaussian":
        p = dist.sigma_hat.shape[0]
        out = rng.standard_normal((k, p)) @ _psd_root(dist.sigma_hat).T
    else:
        raise ValueError(f"unknown bootstrap source {source!r}")
    return out[0] if size is None else out


def simulate_surrogate(x0, gains, theta_hat, noises, state_cap=DEFAULT_STATE_CAP):
    """States ``x*(0..n)`` of the surrogate system driven by ``noises``."""
    n, p = noises.shape
    D = np.einsum("pq,tqk->tpk", theta_hat, gains)
    states = np.empty((n + 1, p))
    states[0] = x0
    x = states[0]
    for t in range(n):
        x = D[t] @ x + noises[t]
        norm = np.linalg.norm(x)
        if not norm <= state_cap:
            raise DivergenceError(t + 1, norm, state_cap)
        states[t + 1] = x
    return states


def _refit(states, gains):
    Z = np.einsum("tqp,tp->tq", gains, states[:-1])
    return least_squares(RegressionData.from_arrays(Z, states[1:])).theta_hat


def bootstrap(history, cfg=None, rng=None, state_cap=DEFAULT_STATE_CAP, data=None):
    """One residual-bootstrap replicate ``theta_tilde`` for ``history``.

    ``data`` may carry the already-accumulated regression data for
    ``history`` to skip rebuilding it. If the surrogate diverges, it is
    retried once with half-scale gaussian noise; if that diverges too,
    ``theta_tilde = theta_hat`` and ``fallback`` is set.
    """
    cfg = cfg or BootstrapConfig()
    rng = make_rng(rng, cfg.rng_seed_offset)
    n = history.horizon
    if n < 1:
        raise ValueError("bootstrap needs a history with at least one step")
    if data is None:
        data = RegressionData.from_trajectory(history)
    theta_hat = least_squares(data).theta_hat
    dist = residuals(data, theta_hat)
    x0 = history.states[0]

    noises = draw_bootstrap_noise(dist, cfg.noise_source, rng, size=n)
    try:
        states = simulate_surrogate(x0, history.gains, theta_hat, noises, state_cap)
    except DivergenceError as first:
        noises = RETRY_SCALE * draw_bootstrap_noise(dist, "gaussian", rng, size=n)
        try:
            states = simulate_surrogate(x0, history.gains, theta_hat, noises, state_cap)
        except DivergenceError:
            log.warning("surrogate diverged twice at n=%d (%s); using theta_hat", n, first)
            return SurrogateRun(np.empty((0, len(x0))), noises, theta_hat.copy(), theta_hat, dist,
                                fallback=True)
    theta_tilde = _refit(states, history.gains)
    return SurrogateRun(states, noises, theta_tilde, theta_hat, dist)


class ResidualBootstrap(BaseEstimator):
    """sklearn-style wrapper: ``fit(trajectory)`` sets ``theta_hat_`` and one
    bootstrapped ``theta_tilde_``; ``sample(k)`` draws ``k`` more replicates."""

    def __init__(self, noise_source="empirical", random_state=None, state_cap=DEFAULT_STATE_CAP):
        self.noise_source = noise_source
        self.random_state = random_state
        self.state_cap = state_cap

    def fit(self, trajectory, y=None):
        self._cfg = BootstrapConfig(self.noise_source)
        self._rng = make_rng(self.random_state)
        self._history = trajectory
        self._data = RegressionData.from_trajectory(trajectory)
        run = bootstrap(trajectory, self._cfg, self._rng, self.state_cap, self._data)
        self.surrogate_ = run
        self.theta_hat_ = run.theta_hat
        self.theta_tilde_ = run.theta_tilde
        self.residuals_ = run.residuals
        return self

    def sample(self, k):
        check_is_fitted(self, "theta_tilde_")
        return np.stack([
            bootstrap(self._history, self._cfg, self._rng, self.state_cap, self._data).theta_tilde
            for _ in range(k)
        ])
