import numpy as np
import pytest
import scipy.linalg

from quickdetect.info import solve_stationary_covariance
from quickdetect.models import UnstableModelError, companion_matrix


def test_scalar_geometric_series():
    assert solve_stationary_covariance([[0.5]], [[1.0]])[0, 0] == pytest.approx(4 / 3, rel=1e-14)


def test_zero_dynamics_returns_innovation_covariance():
    B = np.array([[2.0, 0.5], [0.5, 1.0]])
    np.testing.assert_array_equal(solve_stationary_covariance(np.zeros((2, 2)), B), B)


def test_ar2_companion_matches_truncated_series():
    A = companion_matrix([0.5, 0.2])
    B = np.diag([1.0, 0.0])
    expected = np.zeros((2, 2))
    power = np.eye(2)
    for _ in range(501):
        expected += power @ B @ power.T
        power = power @ A
    np.testing.assert_allclose(solve_stationary_covariance(A, B), expected, rtol=1e-10)


def test_matches_scipy_on_random_stable_systems():
    rng = np.random.default_rng(12)
    for _ in range(20):
        A = rng.standard_normal((4, 4))
        A *= 0.95 / np.max(np.abs(np.linalg.eigvals(A)))
        factor = rng.standard_normal((4, 4))
        B = factor @ factor.T
        F = solve_stationary_covariance(A, B)
        np.testing.assert_allclose(F, F.T)
        np.testing.assert_allclose(F, scipy.linalg.solve_discrete_lyapunov(A, B), rtol=1e-8, atol=1e-10)
        assert np.max(np.abs(F - A @ F @ A.T - B)) <= 1e-10 * np.max(np.abs(F))


def test_unstable_dynamics_rejected():
    with pytest.raises(UnstableModelError):
        solve_stationary_covariance([[1.0]], [[1.0]])


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        solve_stationary_covariance(np.eye(2) * 0.5, np.eye(3))
