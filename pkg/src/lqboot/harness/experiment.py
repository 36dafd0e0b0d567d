"""Seeded Monte-Carlo replicates of the adaptive regulator."""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..bootstrap import BootstrapConfig
from ..metrics import identification_error, regret
from ..model import DivergenceError, theta_in_force
from ..policy import run_adaptive
from ..riccati import solve_riccati

log = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1


class ExperimentError(RuntimeError):
    pass


def mix_seed(base_seed, index):
    """64-bit seed for replicate ``index``: the splitmix64 output for state
    ``base_seed + (index + 1) * 0x9E3779B97F4A7C15`` (mod 2**64)."""
    z = (int(base_seed) + (int(index) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True, eq=False)
class ReplicateResult:
    """One replicate. Arrays indexed by time run over t = 0..n; update
    arrays have one entry per bootstrap update."""

    index: int
    seed: int
    diverged: bool
    divergence_time: int = None
    costs: np.ndarray = None          # c_t, t = 0..n-1
    regret: np.ndarray = None         # R(t), t = 0..n
    update_times: np.ndarray = None
    est_errors: np.ndarray = None     # ||theta_hat - theta0(t)||_2 at update times
    rho_actual: np.ndarray = None
    rho_surrogate: np.ndarray = None
    first_noise: np.ndarray = None

    @property
    def horizon(self):
        return 0 if self.costs is None else len(self.costs)

    @property
    def normalized_regret(self):
        t = np.arange(1, len(self.regret))
        return self.regret[1:] / np.sqrt(t)

    @property
    def normalized_error(self):
        return self.update_times ** 0.25 * self.est_errors


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    config: object
    replicates: tuple

    @property
    def completed(self):
        return [r for r in self.replicates if not r.diverged]

    @property
    def diverged(self):
        return [r for r in self.replicates if r.diverged]

    def regret_percentiles(self, q=(10, 50, 90)):
        """Pointwise percentiles of the normalized regret, shape ``(len(q), n)``."""
        curves = np.stack([r.normalized_regret for r in self.completed])
        return np.percentile(curves, q, axis=0)

    def error_percentiles(self, q=(10, 50, 90)):
        curves = np.stack([r.normalized_error for r in self.completed])
        return np.percentile(curves, q, axis=0)

    @property
    def update_times(self):
        return self.completed[0].update_times


def run_replicate(cfg, index):
    seed = mix_seed(cfg.base_seed, index)
    model = cfg.model()
    try:
        traj, state = run_adaptive(
            model, cfg.beta, cfg.horizon, BootstrapConfig(cfg.bootstrap_source),
            rng=seed, break_schedule=list(cfg.breaks), state_cap=cfg.state_cap,
        )
    except DivergenceError as exc:
        log.warning("replicate %d diverged: %s", index, exc)
        return ReplicateResult(index, seed, diverged=True, divergence_time=exc.time)
    star = solve_riccati(model.theta0, model.costs)
    reg = regret(traj, model, star, traj.noises, list(cfg.breaks))
    log_ = state.update_log
    times = np.array([u.time for u in log_], dtype=int)
    errors = np.array([
        identification_error(u.theta_hat, theta_in_force(model.theta0, cfg.breaks, u.time))
        for u in log_
    ])
    return ReplicateResult(
        index=index,
        seed=seed,
        diverged=False,
        costs=reg.adaptive_costs,
        regret=reg.cumulative,
        update_times=times,
        est_errors=errors,
        rho_actual=np.array([u.rho_actual for u in log_]),
        rho_surrogate=np.array([u.rho_surrogate for u in log_]),
        first_noise=traj.noises[0].copy(),
    )


def worker_count(cfg, workers=None):
    env = os.environ.get("LQBOOT_WORKERS")
    if env:
        return max(1, int(env))
    if workers is not None:
        return max(1, int(workers))
    if cfg.workers is not None:
        return max(1, cfg.workers)
    return max(1, min(os.cpu_count() or 1, cfg.replicates))


def run_experiment(cfg, workers=None, indices=None):
    """Run replicates ``indices`` (default: all) and collect their metrics.

    Results are ordered by replicate index whatever the worker count.
    Raises :class:`ExperimentError` if every replicate diverged.
    """
    indices = list(range(cfg.replicates)) if indices is None else list(indices)
    n_workers = min(worker_count(cfg, workers), max(1, len(indices)))
    if n_workers == 1:
        results = [run_replicate(cfg, i) for i in indices]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(run_replicate, [cfg] * len(indices), indices))
    results.sort(key=lambda r: r.index)
    if results and all(r.diverged for r in results):
        raise ExperimentError(f"all {len(results)} replicates diverged")
    return ExperimentResult(cfg, tuple(results))
