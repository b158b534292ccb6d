# -*- coding: utf-8 -*-
"""
Discrete-time agent models: LTI ``x+ = Ax + Bu`` and control-affine ``x+ = f(x) + g(x)u``.
"""
import logging
from functools import partial
from typing import Callable, Union

import attr
import numpy as np

from .exceptions import ContractViolation


class ModelName:
    SINGLE_INTEGRATOR = 'single-integrator'
    PLANAR_QUADROTOR = 'planar-quadrotor'
    UNICYCLE = 'unicycle'

    ALL = (SINGLE_INTEGRATOR, PLANAR_QUADROTOR, UNICYCLE)


def _positive(instance, attribute, value):
    if not value > 0:
        raise ValueError(f'{attribute.name} must be positive, got {value}')


@attr.s(frozen=True)
class ModelKind(object):
    name = attr.ib(validator=attr.validators.in_(ModelName.ALL))
    dt = attr.ib(default=0.1, converter=float, validator=_positive)
    g_grav = attr.ib(default=9.81, converter=float)
    ixx = attr.ib(default=0.0075, converter=float, validator=_positive)
    iyy = attr.ib(default=0.0075, converter=float, validator=_positive)


def _check_matrix(name: str, value: np.ndarray, shape) -> None:
    if value.shape != shape:
        raise ContractViolation(f'{name} has shape {value.shape}, expected {shape}')
    if not np.all(np.isfinite(value)):
        raise ContractViolation(f'{name} has non-finite entries')


@attr.s(eq=False, frozen=True)
class LtiModel(object):
    A = attr.ib(converter=lambda x: np.atleast_2d(np.asarray(x, dtype=float)))
    B = attr.ib(converter=lambda x: np.atleast_2d(np.asarray(x, dtype=float)))
    C = attr.ib(converter=lambda x: np.atleast_2d(np.asarray(x, dtype=float)))
    name = attr.ib(default='lti')

    def __attrs_post_init__(self):
        n = self.A.shape[0]
        _check_matrix('A', self.A, (n, n))
        _check_matrix('B', self.B, (n, self.B.shape[1]))
        _check_matrix('C', self.C, (self.C.shape[0], n))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]


@attr.s(eq=False, frozen=True)
class NonlinearModel(object):
    f: Callable[[np.ndarray], np.ndarray] = attr.ib()
    g: Callable[[np.ndarray], np.ndarray] = attr.ib()
    C = attr.ib(converter=lambda x: np.atleast_2d(np.asarray(x, dtype=float)))
    m = attr.ib(validator=attr.validators.instance_of(int))
    name = attr.ib(default='control-affine')

    @property
    def n(self) -> int:
        return self.C.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]


Model = Union[LtiModel, NonlinearModel]


def _unicycle_drift(x: np.ndarray) -> np.ndarray:
    return np.array(x, dtype=float)


def _unicycle_input(dt: float, x: np.ndarray) -> np.ndarray:
    theta = x[2]
    return dt * np.array([[np.cos(theta), 0.0],
                          [np.sin(theta), 0.0],
                          [0.0, 1.0]])


def _linear_drift(A: np.ndarray, x: np.ndarray) -> np.ndarray:
    return A @ x


def _constant_input(B: np.ndarray, x: np.ndarray) -> np.ndarray:
    return B


def _quadrotor_axis(g_grav: float, dt: float, inertia: float):
    a = np.array([[1.0, 1.0, 0.0, 0.0],
                  [0.0, 1.0, g_grav * dt ** 2, 0.0],
                  [0.0, 0.0, 1.0, 1.0],
                  [0.0, 0.0, 0.0, 1.0]])
    b = np.array([0.0, 0.0, 0.0, dt ** 2 / inertia])
    return a, b


def build_model(kind: ModelKind) -> Model:
    """Build the discrete-time model for a model kind.

    - single-integrator: A = C = I2, B = dt * I2 (inputs are velocities)
    - planar-quadrotor: 8 states [px, dpx, theta, dtheta, py, dpy, phi, dphi] in increment coordinates,
      torques (tau_x, tau_y) as inputs, linearised at hover
    - unicycle: state (px, py, theta), inputs (v, omega)
    """
    if kind.name == ModelName.SINGLE_INTEGRATOR:
        return LtiModel(A=np.eye(2), B=kind.dt * np.eye(2), C=np.eye(2), name=kind.name)
    if kind.name == ModelName.PLANAR_QUADROTOR:
        a_x, b_x = _quadrotor_axis(kind.g_grav, kind.dt, kind.ixx)
        a_y, b_y = _quadrotor_axis(kind.g_grav, kind.dt, kind.iyy)
        A = np.zeros((8, 8))
        A[:4, :4] = a_x
        A[4:, 4:] = a_y
        B = np.zeros((8, 2))
        B[:4, 0] = b_x
        B[4:, 1] = b_y
        C = np.zeros((2, 8))
        C[0, 0] = 1.0
        C[1, 4] = 1.0
        return LtiModel(A=A, B=B, C=C, name=kind.name)
    if kind.name == ModelName.UNICYCLE:
        C = np.array([[1.0, 0.0, 0.0],
                      [0.0, 1.0, 0.0]])
        return NonlinearModel(f=_unicycle_drift, g=partial(_unicycle_input, kind.dt), C=C, m=2, name=kind.name)
    raise ValueError(f'Unknown model kind "{kind.name}"')


def as_control_affine(model: LtiModel) -> NonlinearModel:
    """The LTI model rewritten with f(x) = Ax and constant g(x) = B."""
    return NonlinearModel(f=partial(_linear_drift, model.A),
                          g=partial(_constant_input, model.B),
                          C=model.C,
                          m=model.m,
                          name=f'{model.name}-affine')


def _check_state_input(model: Model, x: np.ndarray, u: np.ndarray) -> None:
    if x.shape != (model.n,):
        raise ContractViolation(f'State has shape {x.shape}, model "{model.name}" expects ({model.n},)')
    if u.shape != (model.m,):
        raise ContractViolation(f'Input has shape {u.shape}, model "{model.name}" expects ({model.m},)')


def step_lti(model: LtiModel, x, u) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    _check_state_input(model, x, u)
    return model.A @ x + model.B @ u


def step_nonlinear(model: NonlinearModel, x, u) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    _check_state_input(model, x, u)
    return np.asarray(model.f(x), dtype=float) + np.asarray(model.g(x), dtype=float) @ u


def step(model: Model, x, u) -> np.ndarray:
    if isinstance(model, LtiModel):
        return step_lti(model, x, u)
    return step_nonlinear(model, x, u)


def output(model: Model, x) -> np.ndarray:
    return model.C @ np.asarray(x, dtype=float)


def state_from_position(model: Model, y) -> np.ndarray:
    """Embed an output position into a state with every non-output component at zero."""
    y = np.asarray(y, dtype=float)
    if y.shape != (model.p,):
        raise ContractViolation(f'Position has shape {y.shape}, expected ({model.p},)')
    return model.C.T @ y


def rollout(model: Model, x0, inputs) -> np.ndarray:
    """States x0..xT under a T x m input sequence, stacked as a (T+1) x n array."""
    inputs = np.asarray(inputs, dtype=float).reshape(-1, model.m)
    states = [np.asarray(x0, dtype=float)]
    for u in inputs:
        states.append(step(model, states[-1], u))
    logging.debug('Rolled out %s steps of model "%s"', inputs.shape[0], model.name)
    return np.vstack(states)
