import numpy as np
import pytest
from scipy.optimize import minimize

from barrier_comp import Infeasible, MaxIterations
from barrier_comp.qp import lp_feasibility, min_distance_qp


def test_unconstrained_optimum_feasible():
    u, active, lam = min_distance_qp([[1.0, 0.0]], [-1.0], [0.3, 0.4])
    np.testing.assert_array_equal(u, [0.3, 0.4])
    assert active == []


def test_projection_onto_halfplane():
    u, active, lam = min_distance_qp([[1.0, 1.0]], [2.0], [0.0, 0.0])
    np.testing.assert_allclose(u, [1.0, 1.0])
    assert active == [0]
    np.testing.assert_allclose(lam, [1.0])


def test_corner_of_two_constraints():
    u, active, _ = min_distance_qp([[1.0, 0.0], [0.0, 1.0]], [1.0, 2.0], [0.0, 0.0])
    np.testing.assert_allclose(u, [1.0, 2.0])
    assert sorted(active) == [0, 1]


def test_dropping_a_constraint():
    # The first violated row is later made redundant by the second one.
    A = np.array([[1.0, 0.2], [1.0, -1.0], [1.0, 1.0]])
    b = np.array([1.0, 3.0, 3.0])
    u, active, lam = min_distance_qp(A, b, [0.0, 0.0])
    np.testing.assert_allclose(u, [3.0, 0.0], atol=1e-12)
    assert np.all(A @ u >= b - 1e-12)
    assert np.all(lam >= -1e-12)


def test_matches_general_solver():
    rng = np.random.default_rng(0)
    for _ in range(30):
        m = int(rng.integers(1, 5))
        N = int(rng.integers(1, 8))
        u_star = rng.normal(size=m)
        A = rng.normal(size=(N, m))
        b = A @ u_star - rng.uniform(0, 0.5, size=N)
        u_des = rng.normal(size=m) * 3
        u, _, _ = min_distance_qp(A, b, u_des)
        ref = minimize(lambda v: np.sum((v - u_des) ** 2), u_star, jac=lambda v: 2 * (v - u_des),
                       constraints=[{"type": "ineq", "fun": lambda v: A @ v - b, "jac": lambda v: A}],
                       method="SLSQP", options={"ftol": 1e-14, "maxiter": 500})
        np.testing.assert_allclose(u, ref.x, atol=1e-6)
        assert np.all(A @ u >= b - 1e-10)


def test_infeasible_certificate():
    A = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
    b = np.array([1.0, 1.0, 0.0])
    with pytest.raises(Infeasible) as info:
        min_distance_qp(A, b, [0.0, 0.0])
    lam = info.value.certificate
    assert np.all(lam >= 0)
    assert np.linalg.norm(lam @ A) < 1e-12
    assert lam @ b > 0


def test_zero_row_infeasible():
    with pytest.raises(Infeasible):
        min_distance_qp([[0.0, 0.0]], [1.0], [0.0, 0.0])


def test_iteration_cap():
    with pytest.raises(MaxIterations):
        min_distance_qp([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0], [0.0, 0.0], max_iter=1)


def test_lp_feasible_witness():
    A = np.array([[1.0, 0.0], [0.0, 1.0]])
    res = lp_feasibility(A, [1.0, -2.0])
    assert res.feasible and res.margin >= 0
    assert np.all(A @ res.witness >= [1.0, -2.0])


def test_lp_certificate_normalized():
    A = np.array([[2.0, 0.0], [-1.0, 0.0]])
    res = lp_feasibility(A, [1.0, 1.0])
    assert not res.feasible
    np.testing.assert_allclose(res.certificate, [0.5, 1.0], atol=1e-12)
    assert res.certificate.max() == 1.0
