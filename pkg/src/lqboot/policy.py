"""Episodic bootstrap-based adaptive regulator.

Within an episode the controller applies ``u(t) = L(theta_tilde) x(t)``
with a frozen ``theta_tilde``; at each update time ``ceil(beta**m)`` it
re-bootstraps the full history and re-solves the Riccati equation.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import as_matrix
from .bootstrap import BootstrapConfig, bootstrap
from .estimator import RegressionData
from .model import (DEFAULT_STATE_CAP, DivergenceError, Trajectory, draw_noise,
                    normalize_breaks, theta_in_force)
from .riccati import RiccatiError, is_stabilizable, solve_riccati, spectral_radius

log = logging.getLogger(__name__)

INIT_SCALE = 0.3
INIT_MAX_TRIES = 100
RICCATI_RETRIES = 10


class ConfigurationError(ValueError):
    pass


class InitializationError(RuntimeError):
    pass


@dataclass(frozen=True)
class EpisodeSchedule:
    beta: float
    update_times: tuple


@dataclass(frozen=True, eq=False)
class UpdateRecord:
    time: int
    episode: int
    theta_tilde: np.ndarray
    theta_hat: np.ndarray
    rho_actual: float
    rho_surrogate: float
    riccati_failures: int = 0
    kept_previous: bool = False
    surrogate_fallback: bool = False


@dataclass(eq=False)
class PolicyState:
    theta_tilde: np.ndarray
    solution: object  # ControlSolution
    episode_index: int = 0
    history: Trajectory = None
    update_log: list = field(default_factory=list)
    init_attempts: int = 1


def make_schedule(beta, horizon):
    if not beta > 1:
        raise ConfigurationError(f"reinforcement rate must exceed 1, got {beta}")
    if horizon < 1:
        raise ConfigurationError(f"horizon must be >= 1, got {horizon}")
    times = []
    m = 1
    while True:
        t = math.ceil(beta ** m)
        if t > horizon:
            break
        if not times or t > times[-1]:
            times.append(t)
        m += 1
    return EpisodeSchedule(beta, tuple(times))


def initialize(dims, costs, rng, scale=INIT_SCALE, max_tries=INIT_MAX_TRIES):
    """Draw a stabilizable ``theta_tilde_0`` with i.i.d. ``N(0, scale^2)`` entries."""
    for attempt in range(1, max_tries + 1):
        theta = scale * rng.standard_normal((dims.p, dims.q))
        report = is_stabilizable(theta, costs)
        if report.stabilizable:
            sol = solve_riccati(theta, costs)
            if spectral_radius(theta[:, :dims.p] + theta[:, dims.p:] @ sol.L) < 1:
                return PolicyState(theta_tilde=theta, solution=sol, init_attempts=attempt)
    raise InitializationError(f"no stabilizable initial parameter in {max_tries} draws")


def _split_rng(rng):
    if isinstance(rng, np.random.Generator):
        noise_rng, policy_rng = rng.spawn(2)
    else:
        noise_rng, policy_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(rng).spawn(2))
    return noise_rng, policy_rng


def run_adaptive(model, beta, horizon, cfg=None, rng=None, break_schedule=None,
                 theta_tilde0=None, noises=None, x0=None, state_cap=DEFAULT_STATE_CAP):
    """Run the episodic bootstrap controller on ``model`` for ``horizon`` steps.

    The noise path and the controller's own randomness come from two
    independent child streams of ``rng``, so the same seed yields the same
    noise path regardless of what the controller does. ``noises`` overrides
    the noise path; ``theta_tilde0`` skips the random initialization.

    Returns ``(trajectory, state)``. Raises :class:`DivergenceError` if the
    true state norm exceeds ``state_cap``.
    """
    cfg = cfg or BootstrapConfig()
    schedule = make_schedule(beta, horizon)
    dims = model.dims
    p, r, q = dims.p, dims.r, dims.q
    breaks = normalize_breaks(break_schedule, dims)
    noise_rng, policy_rng = _split_rng(rng)

    if noises is None:
        noises = draw_noise(model.noise, noise_rng, size=horizon)
    noises = as_matrix(noises, shape=(horizon, p), name="noises")

    if theta_tilde0 is None:
        state = initialize(dims, model.costs, policy_rng)
    else:
        theta_tilde0 = as_matrix(theta_tilde0, shape=(p, q), name="theta_tilde0")
        state = PolicyState(theta_tilde=theta_tilde0, solution=solve_riccati(theta_tilde0, model.costs))

    states = np.zeros((horizon + 1, p))
    if x0 is not None:
        states[0] = x0
    actions = np.zeros((horizon, r))
    gains = np.zeros((horizon, q, p))
    data = RegressionData(p, q, capacity=horizon)
    updates = set(schedule.update_times)

    for t in range(horizon):
        if t in updates:
            history = Trajectory(states[: t + 1], actions[:t], gains[:t], noises[:t])
            _update(state, model, history, data, cfg, policy_rng, breaks, t, state_cap)
        M = state.solution.M
        G = state.solution.L
        x = states[t]
        u = G @ x
        theta = theta_in_force(model.theta0, breaks, t)
        nxt = theta[:, :p] @ x + theta[:, p:] @ u + noises[t]
        norm = np.linalg.norm(nxt)
        if not norm <= state_cap:
            raise DivergenceError(t + 1, norm, state_cap)
        actions[t] = u
        gains[t] = M
        states[t + 1] = nxt
        data.append(np.concatenate([x, u]), nxt)

    traj = Trajectory(states, actions, gains, noises.copy())
    if horizon in updates:
        _update(state, model, traj, data, cfg, policy_rng, breaks, horizon, state_cap)
    state.history = traj
    return traj, state


def _update(state, model, history, data, cfg, rng, breaks, t, state_cap):
    """Re-bootstrap at time ``t`` and swap in the new gain if it is usable."""
    failures = 0
    run = None
    solution = None
    while failures <= RICCATI_RETRIES:
        run = bootstrap(history, cfg, rng, state_cap, data=data)
        try:
            solution = solve_riccati(run.theta_tilde, model.costs)
            break
        except RiccatiError:
            failures += 1
    kept = solution is None
    if kept:
        log.info("t=%d: no usable bootstrap parameter after %d tries; keeping previous", t, failures)
    else:
        state.theta_tilde = run.theta_tilde
        state.solution = solution
    state.episode_index += 1
    theta0 = theta_in_force(model.theta0, breaks, t)
    M = state.solution.M
    state.update_log.append(UpdateRecord(
        time=t,
        episode=state.episode_index,
        theta_tilde=state.theta_tilde,
        theta_hat=run.theta_hat,
        rho_actual=spectral_radius(theta0 @ M),
        rho_surrogate=spectral_radius(run.theta_hat @ M),
        riccati_failures=failures,
        kept_previous=kept,
        surrogate_fallback=run.fallback,
    ))


class BootstrapAdaptiveController(BaseEstimator):
    """sklearn-style face of the adaptive regulator.

    ``fit(model)`` runs the closed loop for ``horizon`` steps and keeps the
    trajectory and update log; ``predict(X)`` returns the actions the final
    policy takes for rows of states.
    """

    def __init__(self, beta=1.2, horizon=10_000, bootstrap_source="empirical",
                 random_state=None, state_cap=DEFAULT_STATE_CAP):
        self.beta = beta
        self.horizon = horizon
        self.bootstrap_source = bootstrap_source
        self.random_state = random_state
        self.state_cap = state_cap

    def fit(self, model, y=None, break_schedule=None):
        traj, state = run_adaptive(
            model, self.beta, self.horizon, BootstrapConfig(self.bootstrap_source),
            rng=self.random_state, break_schedule=break_schedule, state_cap=self.state_cap,
        )
        self.trajectory_ = traj
        self.state_ = state
        self.update_log_ = state.update_log
        self.theta_tilde_ = state.theta_tilde
        self.L_ = state.solution.L
        self.theta_hat_ = state.update_log[-1].theta_hat if state.update_log else None
        return self

    def predict(self, X):
        check_is_fitted(self, "L_")
        X = as_matrix(X, shape=(None, self.L_.shape[1]), name="X")
        return X @ self.L_.T
