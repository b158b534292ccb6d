# -*- coding: utf-8 -*-

import math

import numpy as np
import pytest

from densecov.dynamics import ModelKind, ModelName, LtiModel, NonlinearModel, build_model, step_lti, \
    step_nonlinear, step, output, state_from_position, rollout, as_control_affine
from densecov.exceptions import ContractViolation


@pytest.fixture()
def quadrotor():
    return build_model(ModelKind(name=ModelName.PLANAR_QUADROTOR, dt=0.1, g_grav=9.81, ixx=0.0075, iyy=0.0075))


@pytest.fixture()
def unicycle():
    return build_model(ModelKind(name=ModelName.UNICYCLE, dt=0.1))


def test_integrator_identity_dynamics():
    model = build_model(ModelKind(name=ModelName.SINGLE_INTEGRATOR, dt=1.0))
    assert isinstance(model, LtiModel)
    assert (model.n, model.m, model.p) == (2, 2, 2)
    for mat in (model.A, model.B, model.C):
        assert np.array_equal(mat, np.eye(2))
    assert step_lti(model, [0.0, 0.0], [1.0, 0.0]).tolist() == [1.0, 0.0]


def test_integrator_inputs_are_velocities():
    model = build_model(ModelKind(name=ModelName.SINGLE_INTEGRATOR, dt=0.1))
    assert np.array_equal(model.B, 0.1 * np.eye(2))
    np.testing.assert_allclose(step(model, [1.0, 1.0], [10.0, -10.0]), [2.0, 0.0])


def test_quadrotor_dimensions(quadrotor):
    assert isinstance(quadrotor, LtiModel)
    assert (quadrotor.n, quadrotor.m, quadrotor.p) == (8, 2, 2)


def test_quadrotor_closed_form(quadrotor):
    dt, g, inertia = 0.1, 9.81, 0.0075
    a_ax = np.array([[1.0, 1.0, 0.0, 0.0],
                     [0.0, 1.0, g * dt ** 2, 0.0],
                     [0.0, 0.0, 1.0, 1.0],
                     [0.0, 0.0, 0.0, 1.0]])
    expected_a = np.zeros((8, 8))
    expected_a[:4, :4] = a_ax
    expected_a[4:, 4:] = a_ax
    assert np.array_equal(quadrotor.A, expected_a)
    expected_b = np.zeros((8, 2))
    expected_b[3, 0] = dt ** 2 / inertia
    expected_b[7, 1] = dt ** 2 / inertia
    assert np.array_equal(quadrotor.B, expected_b)
    expected_c = np.zeros((2, 8))
    expected_c[0, 0] = 1.0
    expected_c[1, 4] = 1.0
    assert np.array_equal(quadrotor.C, expected_c)


def test_quadrotor_torque_from_rest(quadrotor):
    x = step_lti(quadrotor, np.zeros(8), [1.0, 0.0])
    expected = np.zeros(8)
    expected[3] = 0.1 ** 2 / 0.0075
    assert np.array_equal(x, expected)


def test_unequal_inertia_per_axis():
    model = build_model(ModelKind(name=ModelName.PLANAR_QUADROTOR, dt=0.1, ixx=0.01, iyy=0.02))
    assert model.B[3, 0] == pytest.approx(0.01 / 0.01)
    assert model.B[7, 1] == pytest.approx(0.01 / 0.02)


def test_invalid_model_parameters():
    with pytest.raises(ValueError):
        ModelKind(name=ModelName.PLANAR_QUADROTOR, ixx=0.0)
    with pytest.raises(ValueError):
        ModelKind(name=ModelName.PLANAR_QUADROTOR, iyy=-1.0)
    with pytest.raises(ValueError):
        ModelKind(name=ModelName.SINGLE_INTEGRATOR, dt=0.0)
    with pytest.raises(ValueError):
        ModelKind(name='hovercraft')


def test_zero_input_fixed_point():
    model = build_model(ModelKind(name=ModelName.SINGLE_INTEGRATOR))
    x = np.array([3.5, -2.0])
    assert np.array_equal(step_lti(model, x, np.zeros(2)), x)


def test_step_lti_linearity(quadrotor):
    rng = np.random.default_rng(0)
    for _ in range(20):
        x1, x2 = rng.normal(size=8), rng.normal(size=8)
        u1, u2 = rng.normal(size=2), rng.normal(size=2)
        lhs = step_lti(quadrotor, x1 + x2, u1 + u2)
        rhs = step_lti(quadrotor, x1, u1) + step_lti(quadrotor, x2, u2) - step_lti(quadrotor, np.zeros(8), np.zeros(2))
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_step_dimension_mismatch(quadrotor, unicycle):
    with pytest.raises(ContractViolation):
        step_lti(quadrotor, np.zeros(7), np.zeros(2))
    with pytest.raises(ContractViolation):
        step_lti(quadrotor, np.zeros(8), np.zeros(3))
    with pytest.raises(ContractViolation):
        step_nonlinear(unicycle, np.zeros(2), np.zeros(2))
    with pytest.raises(ContractViolation):
        LtiModel(A=np.eye(2), B=np.ones((3, 1)), C=np.eye(2))
    with pytest.raises(ContractViolation):
        LtiModel(A=[[1.0, np.inf], [0.0, 1.0]], B=np.eye(2), C=np.eye(2))


def test_unicycle_forward(unicycle):
    assert isinstance(unicycle, NonlinearModel)
    assert (unicycle.n, unicycle.m, unicycle.p) == (3, 2, 2)
    np.testing.assert_allclose(step_nonlinear(unicycle, [0.0, 0.0, 0.0], [1.0, 0.0]), [0.1, 0.0, 0.0])


def test_unicycle_input_channel_at_zero_heading(unicycle):
    np.testing.assert_allclose(unicycle.g(np.zeros(3)) @ np.array([2.0, 0.0]), [0.2, 0.0, 0.0])


def test_unicycle_pure_rotation(unicycle):
    x = step_nonlinear(unicycle, [1.0, 2.0, 0.3], [0.0, 0.5])
    assert x[:2].tolist() == [1.0, 2.0]
    assert x[2] == pytest.approx(0.35)


def test_unicycle_heading_north(unicycle):
    x = step_nonlinear(unicycle, [0.0, 0.0, math.pi / 2], [1.0, 0.0])
    np.testing.assert_allclose(x, [0.0, 0.1, math.pi / 2], atol=1e-12, rtol=0.0)


def test_constant_input_channel_matches_lti(quadrotor):
    affine = as_control_affine(quadrotor)
    rng = np.random.default_rng(3)
    for _ in range(10):
        x, u = rng.normal(size=8), rng.normal(size=2)
        assert np.array_equal(step_nonlinear(affine, x, u), step_lti(quadrotor, x, u))


def test_output_and_embedding(quadrotor):
    x = state_from_position(quadrotor, [12.0, 34.0])
    assert x.shape == (8,)
    assert x[0] == 12.0 and x[4] == 34.0
    assert np.count_nonzero(x) == 2
    assert output(quadrotor, x).tolist() == [12.0, 34.0]
    with pytest.raises(ContractViolation):
        state_from_position(quadrotor, [1.0, 2.0, 3.0])


def test_rollout(quadrotor):
    inputs = np.tile([1.0, -1.0], (4, 1))
    states = rollout(quadrotor, np.zeros(8), inputs)
    assert states.shape == (5, 8)
    x = np.zeros(8)
    for i, u in enumerate(inputs):
        x = step(quadrotor, x, u)
        assert np.array_equal(states[i + 1], x)
    assert rollout(quadrotor, np.zeros(8), np.empty((0, 2))).shape == (1, 8)
