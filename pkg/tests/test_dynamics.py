import numpy as np
import pytest

from barrier_comp import (
    CompositionParams,
    DimensionMismatch,
    Dynamics,
    HalfSpace,
    SingleIntegrator,
    layerize,
    leaf_eval,
    lie_derivatives,
    load_builtin,
    smooth_eval,
)
from barrier_comp.dynamics import leaf_lie_derivatives, lie_from_gradient
from helpers import random_dynamics


def test_single_integrator():
    dyn = SingleIntegrator(3)
    assert dyn.m == 3
    np.testing.assert_array_equal(dyn.drift(np.ones(3)), 0.0)
    np.testing.assert_array_equal(dyn.input_map(np.ones(3)), np.eye(3))
    np.testing.assert_array_equal(dyn(np.zeros(3), [1, 2, 3]), [1, 2, 3])


def test_single_integrator_lie():
    spec = load_builtin("example3").layered
    ev = smooth_eval(spec, CompositionParams(10.0), (1.0, 2.0))
    lie = lie_derivatives(SingleIntegrator(2), ev)
    assert lie.lfh == 0.0
    np.testing.assert_array_equal(lie.lgh, ev.gradient)


def test_halfspace_leaf_lgh_is_normal():
    spec = layerize(HalfSpace((0.6, -0.8), (1, 1)))
    ev = smooth_eval(spec, CompositionParams(1.0), (4.0, -2.0))
    np.testing.assert_allclose(lie_derivatives(SingleIntegrator(2), ev).lgh, [0.6, -0.8])


def test_composed_lie_is_weighted_leaf_sum():
    rng = np.random.default_rng(2)
    spec = load_builtin("example2").layered
    dyn = random_dynamics(rng, 2, 3)
    for x in rng.uniform(-3, 3, size=(20, 2)):
        ev = smooth_eval(spec, CompositionParams(10.0), x)
        lie = lie_derivatives(dyn, ev)
        leaves = leaf_lie_derivatives(dyn, leaf_eval(spec, x), x)
        lgh = sum(w * l.lgh for w, l in zip(ev.leaf_weights, leaves))
        lfh = sum(w * l.lfh for w, l in zip(ev.leaf_weights, leaves))
        np.testing.assert_allclose(lie.lgh, lgh, atol=1e-12)
        assert lie.lfh == pytest.approx(lfh, abs=1e-12)


def test_hdot_bilinear():
    rng = np.random.default_rng(4)
    dyn = random_dynamics(rng, 3, 2)
    x = rng.normal(size=3)
    lie = lie_from_gradient(dyn, rng.normal(size=3), x)
    u, v = rng.normal(size=2), rng.normal(size=2)
    a, b = 0.3, -1.7
    lhs = lie.hdot(a * u + b * v) - lie.lfh
    rhs = a * (lie.hdot(u) - lie.lfh) + b * (lie.hdot(v) - lie.lfh)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_general_dynamics_shapes():
    dyn = Dynamics(2, 1, lambda x: [x[1], -x[0]], lambda x: [[0.0], [1.0]])
    np.testing.assert_array_equal(dyn(np.array([1.0, 2.0]), [3.0]), [2.0, 2.0])
    lie = lie_from_gradient(dyn, np.array([1.0, 1.0]), np.array([1.0, 2.0]))
    assert lie.lfh == 1.0
    np.testing.assert_array_equal(lie.lgh, [1.0])


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        lie_from_gradient(SingleIntegrator(2), np.ones(3), np.zeros(2))


def test_evaluation_state_must_match():
    ev = smooth_eval(layerize(HalfSpace((1, 0), (0, 0))), CompositionParams(1.0), (1.0, 0.0))
    with pytest.raises(ValueError):
        lie_derivatives(SingleIntegrator(2), ev, x=(2.0, 0.0))
