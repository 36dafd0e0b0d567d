import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import solve_discrete_are
from sklearn.base import clone

from conftest import K_REF, L_REF, QU, QX
from lqboot._validation import ShapeError
from lqboot.model import CostPair
from lqboot.riccati import (LinearQuadraticRegulator, RiccatiError, feedback_gain,
                            is_stabilizable, riccati_iterates, riccati_operator, solve_riccati,
                            spectral_radius)

GOLDEN = (1 + np.sqrt(5)) / 2
UNIT = CostPair([[1.0]], [[1.0]])


def _dare_oracle(theta, costs):
    p = costs.Qx.shape[0]
    A, B = theta[:, :p], theta[:, p:]
    K = solve_discrete_are(A, B, costs.Qx, costs.Qu)
    L = -np.linalg.solve(B.T @ K @ B + costs.Qu, B.T @ K @ A)
    return K, L


# --- operator ----------------------------------------------------------------

def test_operator_zero_dynamics_gives_qx(ref_costs):
    theta = np.hstack([np.zeros((3, 3)), np.random.default_rng(0).standard_normal((3, 3))])
    P = np.diag([1.0, 2.0, 3.0])
    np.testing.assert_allclose(riccati_operator(theta, ref_costs, P), QX, atol=1e-15)


def test_operator_scalar():
    assert riccati_operator([[1.0, 1.0]], UNIT, [[1.0]])[0, 0] == pytest.approx(1.5, abs=1e-15)


def test_operator_near_reference_fixed_point(ref_theta, ref_costs):
    # The two-decimal reference solution is close to a fixed point but not
    # within half a unit of its last digit; see the acceptance suite. Here we
    # only pin that it is in the right neighbourhood.
    G = riccati_operator(ref_theta, ref_costs, K_REF)
    assert np.max(np.abs(G - K_REF)) < 0.1


def test_operator_shape_error(ref_costs):
    with pytest.raises(ShapeError):
        riccati_operator(np.zeros((3, 5)), ref_costs, np.eye(3))


# --- solve ---------------------------------------------------------------------

def test_scalar_golden_ratio():
    sol = solve_riccati([[1.0, 1.0]], UNIT)
    assert sol.K[0, 0] == pytest.approx(GOLDEN, abs=1e-9)
    assert sol.L[0, 0] == pytest.approx(-GOLDEN / (GOLDEN + 1), abs=1e-9)
    assert 1 + sol.L[0, 0] == pytest.approx(0.3820, abs=1e-4)


def test_zero_dynamics():
    costs = CostPair(np.diag([2.0, 3.0]), [[0.5]])
    sol = solve_riccati(np.hstack([np.zeros((2, 2)), [[1.0], [0.0]]]), costs)
    np.testing.assert_allclose(sol.K, costs.Qx, atol=1e-15)
    np.testing.assert_allclose(sol.L, 0.0, atol=1e-15)


def test_reference_system_matches_dare_oracle(ref_theta, ref_costs):
    sol = solve_riccati(ref_theta, ref_costs)
    K, L = _dare_oracle(ref_theta, ref_costs)
    np.testing.assert_allclose(sol.K, K, atol=1e-8)
    np.testing.assert_allclose(sol.L, L, atol=1e-8)


def test_reference_system_close_to_quoted_values(ref_theta, ref_costs):
    # Tight agreement with the reference values is an acceptance criterion that
    # fails; this records the size of the gap so that it cannot silently grow.
    sol = solve_riccati(ref_theta, ref_costs)
    assert np.max(np.abs(sol.K - K_REF)) < 0.03
    assert np.max(np.abs(sol.L - L_REF)) < 0.05


def test_extended_gain_block(ref_theta, ref_costs):
    sol = solve_riccati(ref_theta, ref_costs)
    assert np.array_equal(sol.M[:3], np.eye(3))
    assert np.array_equal(sol.M[3:], sol.L)


def test_unstabilizable_reports_max_iterations():
    with pytest.raises(RiccatiError) as info:
        solve_riccati([[2.0, 0.0]], UNIT)
    rep = info.value.report
    assert not rep.stabilizable and rep.reason == "max_iterations"
    assert rep.spectral_radius_closed_loop == pytest.approx(2.0)


def test_iteration_cap_reports_max_iterations():
    with pytest.raises(RiccatiError) as info:
        solve_riccati([[1.0, 1.0]], UNIT, max_iter=3)
    assert info.value.report.reason == "max_iterations"


def test_unstable_closed_loop_reason(monkeypatch):
    import lqboot.riccati as ric

    # A converged but destabilizing gain can only come from a bad solve; fake one.
    monkeypatch.setattr(ric, "spectral_radius", lambda M: 1.5)
    with pytest.raises(RiccatiError) as info:
        ric.solve_riccati([[0.5, 1.0]], UNIT)
    assert info.value.report.reason == "unstable_closed_loop"


def test_bad_tolerance():
    with pytest.raises(ValueError):
        solve_riccati([[0.5, 1.0]], UNIT, tol=0)


# --- invariants ----------------------------------------------------------------

def _random_system(seed, p=3, r=3, scale=0.5):
    rng = np.random.default_rng(seed)
    theta = scale * rng.standard_normal((p, p + r))
    F = rng.standard_normal((p, p))
    H = rng.standard_normal((r, r))
    return theta, CostPair(F @ F.T + 0.1 * np.eye(p), H @ H.T + 0.1 * np.eye(r))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_solution_invariants(seed):
    theta, costs = _random_system(seed)
    sol = solve_riccati(theta, costs)
    np.testing.assert_allclose(sol.K, sol.K.T, atol=1e-9)
    assert np.linalg.norm(sol.K - riccati_operator(theta, costs, sol.K)) <= 10 * 1e-10
    assert sol.residual <= 10 * 1e-10
    np.testing.assert_allclose(feedback_gain(theta, costs, sol.K), sol.L, atol=1e-10)
    assert spectral_radius(theta @ sol.M) < 1
    K, L = _dare_oracle(theta, costs)
    np.testing.assert_allclose(sol.K, K, rtol=1e-6, atol=1e-8)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_iterates_are_monotone(seed):
    theta, costs = _random_system(seed)
    P = [np.zeros((3, 3))] + riccati_iterates(theta, costs, 60)
    for a, b in zip(P, P[1:]):
        assert np.linalg.eigvalsh(b - a).min() >= -1e-9


def _scalar_average_cost(a, b, qx, qu, g, sigma2=1.0):
    rho = a + b * g
    with np.errstate(divide="ignore"):
        return np.where(np.abs(rho) < 1, (qx + qu * g**2) * sigma2 / (1 - rho**2), np.inf)


@pytest.mark.parametrize("a,b,qx,qu", [(1.0, 1.0, 1.0, 1.0), (0.9, 0.5, 2.0, 0.3),
                                       (-1.2, 0.8, 1.0, 1.0), (0.3, -1.5, 0.5, 4.0)])
def test_gain_is_optimal_among_constant_gains(a, b, qx, qu):
    sol = solve_riccati([[a, b]], CostPair([[qx]], [[qu]]))
    grid = np.round(np.arange(-3.0, 3.0 + 5e-4, 1e-3), 3)
    costs = _scalar_average_cost(a, b, qx, qu, grid)
    g_best = grid[np.argmin(costs)]
    assert abs(g_best - sol.L[0, 0]) <= 1e-3
    # and the stationary cost at L equals trace(K C) for C = 1
    assert _scalar_average_cost(a, b, qx, qu, sol.L[0, 0]) == pytest.approx(sol.K[0, 0], rel=1e-8)


# --- spectral radius and stabilizability ---------------------------------------

def test_spectral_radius_examples():
    assert spectral_radius(np.eye(3)) == pytest.approx(1.0)
    assert spectral_radius([[0.0, 1.0], [-1.0, 0.0]]) == pytest.approx(1.0)


def test_spectral_radius_non_square():
    with pytest.raises(ShapeError):
        spectral_radius(np.zeros((2, 3)))


def test_stabilizable_stable_without_input():
    rep = is_stabilizable([[0.5, 0.0]], UNIT)
    assert rep.stabilizable and rep.reason == "converged"
    assert rep.spectral_radius_closed_loop == pytest.approx(0.5)


def test_not_stabilizable_without_input():
    rep = is_stabilizable([[2.0, 0.0]], UNIT)
    assert not rep.stabilizable
    assert rep.spectral_radius_closed_loop == pytest.approx(2.0)


def test_reference_system_stabilizable(ref_theta, ref_costs):
    rep = is_stabilizable(ref_theta, ref_costs)
    assert rep.stabilizable
    _, L = _dare_oracle(ref_theta, ref_costs)
    oracle_rho = spectral_radius(ref_theta[:, :3] + ref_theta[:, 3:] @ L)
    assert rep.spectral_radius_closed_loop == pytest.approx(oracle_rho, abs=1e-9)


# --- estimator interface -------------------------------------------------------

def test_regulator_estimator(ref_theta):
    reg = LinearQuadraticRegulator(QX, QU)
    params = reg.get_params()
    assert set(params) == {"Qx", "Qu", "tol", "max_iter"}
    twin = clone(reg)
    assert twin.get_params()["tol"] == 1e-10
    reg.fit(ref_theta)
    X = np.random.default_rng(0).standard_normal((5, 3))
    np.testing.assert_allclose(reg.predict(X), X @ reg.L_.T)
    assert reg.spectral_radius_ < 1
    assert not hasattr(twin, "L_")


def test_regulator_predict_requires_fit():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        LinearQuadraticRegulator(QX, QU).predict(np.zeros((1, 3)))
