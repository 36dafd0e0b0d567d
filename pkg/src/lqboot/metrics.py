"""Costs, regret against the coupled optimal policy, identification error."""

from dataclasses import dataclass

import numpy as np

from ._validation import ShapeError, as_samples, as_vector
from .model import normalize_breaks, simulate_closed_loop
from .riccati import solve_riccati


@dataclass(frozen=True, eq=False)
class RegretSeries:
    """``cumulative[n]`` is R(n) for n = 0..horizon (so ``cumulative[0] == 0``)."""

    cumulative: np.ndarray
    adaptive_costs: np.ndarray
    optimal_costs: np.ndarray

    @property
    def normalized(self):
        n = np.arange(len(self.cumulative), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.cumulative / np.sqrt(n)
        out[0] = np.nan
        return out


@dataclass(frozen=True, eq=False)
class ErrorSeries:
    times: np.ndarray
    errors: np.ndarray

    @property
    def normalized(self):
        return self.times ** 0.25 * self.errors


def instantaneous_cost(costs, x, u):
    x = as_vector(x, costs.Qx.shape[0], "x")
    u = as_vector(u, costs.Qu.shape[0], "u")
    return float(x @ costs.Qx @ x + u @ costs.Qu @ u)


def cost_series(costs, states, actions):
    """Per-step costs ``c_t`` for t = 0..n-1 (``states`` may hold n+1 rows)."""
    X = states[: len(actions)]
    return (np.einsum("ti,ij,tj->t", X, costs.Qx, X)
            + np.einsum("ti,ij,tj->t", actions, costs.Qu, actions))


def optimal_trajectory(model, noises, break_schedule=None, solution_star=None, x0=None):
    """The omniscient policy on the given noise path, re-derived after each break."""
    breaks = normalize_breaks(break_schedule, model.dims)
    if solution_star is None:
        solution_star = solve_riccati(model.theta0, model.costs)
    segments = [(0, solution_star.L)]
    for time, theta in breaks:
        segments.append((time, solve_riccati(theta, model.costs).L))
    starts = [s for s, _ in segments]

    def gain(t):
        return segments[np.searchsorted(starts, t, side="right") - 1][1]

    return simulate_closed_loop(model, gain, len(noises), break_schedule=breaks,
                                noises=noises, x0=x0)


def regret(adaptive, model, solution_star, coupled_noises, break_schedule=None):
    """Pathwise regret of ``adaptive`` against the optimal policy run on the
    same noise path (common random numbers)."""
    coupled_noises = as_samples(coupled_noises, model.dims.p, "coupled_noises")
    if len(coupled_noises) != adaptive.horizon:
        raise ShapeError(f"noise record has {len(coupled_noises)} entries, "
                         f"trajectory has {adaptive.horizon} steps")
    star = optimal_trajectory(model, coupled_noises, break_schedule, solution_star,
                              x0=adaptive.states[0])
    c_pi = cost_series(model.costs, adaptive.states, adaptive.actions)
    c_star = cost_series(model.costs, star.states, star.actions)
    cumulative = np.concatenate([[0.0], np.cumsum(c_pi - c_star)])
    return RegretSeries(cumulative, c_pi, c_star)


def identification_error(theta_hat, theta0):
    theta_hat = np.asarray(theta_hat, dtype=float)
    theta0 = np.asarray(theta0, dtype=float)
    if theta_hat.shape != theta0.shape:
        raise ShapeError(f"shape mismatch {theta_hat.shape} vs {theta0.shape}")
    return float(np.linalg.norm(theta_hat - theta0, 2))


def loglog_slope(values, index=None, window=None):
    """OLS slope of ``log(value)`` on ``log(index)``.

    ``index`` defaults to 1..len(values); ``window = (lo, hi)`` keeps the
    points with ``lo <= index <= hi``.
    """
    values = np.asarray(values, dtype=float)
    index = np.arange(1, len(values) + 1, dtype=float) if index is None else np.asarray(index, dtype=float)
    if window is not None:
        keep = (index >= window[0]) & (index <= window[1])
        values, index = values[keep], index[keep]
    if len(values) < 2:
        raise ValueError("need at least two points for a slope")
    if np.any(values <= 0) or np.any(index <= 0):
        raise ValueError("log-log slope needs positive values and indices")
    return float(np.polyfit(np.log(index), np.log(values), 1)[0])
