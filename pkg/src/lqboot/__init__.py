"""Adaptive control of unknown linear-quadratic systems by residual bootstrap."""

from .bootstrap import BootstrapConfig, ResidualBootstrap, bootstrap, draw_bootstrap_noise
from .estimator import (LeastSquaresIdentifier, RegressionData, gram_matrix, least_squares,
                        residuals)
from .metrics import identification_error, instantaneous_cost, loglog_slope, regret
from .model import (CostPair, Dimensions, DivergenceError, LqModel, NoiseModel, Trajectory,
                    draw_noise, simulate_closed_loop, step)
from .policy import BootstrapAdaptiveController, initialize, make_schedule, run_adaptive
from .riccati import (LinearQuadraticRegulator, RiccatiError, is_stabilizable, riccati_operator,
                      solve_riccati, spectral_radius)

__version__ = "0.1.0"

__all__ = [
    "BootstrapAdaptiveController", "BootstrapConfig", "CostPair", "Dimensions", "DivergenceError",
    "LeastSquaresIdentifier", "LinearQuadraticRegulator", "LqModel", "NoiseModel", "RegressionData",
    "ResidualBootstrap", "RiccatiError", "Trajectory", "bootstrap", "draw_bootstrap_noise",
    "draw_noise", "gram_matrix", "identification_error", "initialize", "instantaneous_cost",
    "is_stabilizable", "least_squares", "loglog_slope", "make_schedule", "regret", "residuals",
    "riccati_operator", "run_adaptive", "simulate_closed_loop", "solve_riccati", "spectral_radius",
    "step",
]
