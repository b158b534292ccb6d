# -*- coding: utf-8 -*-
"""
Optimal control toward locally selected sample-points.

Local sample-points are chosen by weight-normalized Euclidean (wnE) distance. For LTI models the finite-horizon
problem is the KKT system

    E = [[E11,   E12,   0  ],
         [E12^T, 0,     E23],
         [0,     E23^T, E33]]

acting on the stacked states, multipliers and inputs over the horizon. Controls come from a backward Riccati
sweep over its block structure, which stays accurate for unstable A and long horizons. The closed-form block
inverse of E is kept as an audit path. For control-affine models a single-step primal-dual law is used.
"""
import logging
import math
from typing import Optional, Tuple, Dict

import attr
import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve, LinAlgError

from .const import KKT_RESIDUAL_TOL, STRUCTURED_INVERSE_TOL
from .control_params import ControllerConfig
from .dynamics import LtiModel, NonlinearModel, Model, step
from .exceptions import ConditioningError, ContractViolation
from .transport import greedy_fill


@attr.s(eq=False)
class LocalSelection(object):
    indices = attr.ib(converter=lambda x: np.asarray(x, dtype=int).ravel())
    gamma = attr.ib(converter=lambda x: np.asarray(x, dtype=float).ravel())
    points = attr.ib(converter=lambda x: np.asarray(x, dtype=float).reshape(-1, 2))
    gamma_sum = attr.ib(converter=float)
    centroid = attr.ib(converter=lambda x: np.asarray(x, dtype=float).ravel())


def select_local_samples(y, beta: np.ndarray, positions: np.ndarray, alpha: float) -> LocalSelection:
    """Select the local sample-points for an agent at `y`.

    Points are ranked by |q_j - y| / beta_j (points with no remaining weight are skipped, ties go to the lower
    index) and taken greedily until their weight reaches `alpha`.

    Raises:
        InsufficientMassError: if `alpha` exceeds the total remaining weight
    """
    y = np.asarray(y, dtype=float).ravel()
    candidates = np.flatnonzero(beta > 0.0)
    wne = np.linalg.norm(positions[candidates] - y, axis=1) / beta[candidates]
    indices, gamma = greedy_fill(wne, candidates, beta, alpha)
    points = positions[indices]
    centroid = (gamma @ points) / math.fsum(gamma)
    return LocalSelection(indices=indices, gamma=gamma, points=points, gamma_sum=alpha, centroid=centroid)


@attr.s(eq=False)
class KktSystem(object):
    """Block-structured KKT system of the horizon problem.

    Only the generating blocks are stored: Qbar = gamma_sum * C^T C + Q, A, B, R and the horizon T.
    """
    Qbar = attr.ib()
    A = attr.ib()
    B = attr.ib()
    R = attr.ib()
    horizon = attr.ib(validator=attr.validators.instance_of(int))
    F1 = attr.ib()
    F2 = attr.ib()

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def E11(self) -> np.ndarray:
        return np.kron(np.eye(self.horizon), self.Qbar)

    @property
    def E12(self) -> np.ndarray:
        return np.kron(np.eye(self.horizon), -np.eye(self.n)) + np.kron(np.eye(self.horizon, k=1), self.A.T)

    @property
    def E23(self) -> np.ndarray:
        return np.kron(np.eye(self.horizon), self.B)

    @property
    def E33(self) -> np.ndarray:
        return np.kron(np.eye(self.horizon), self.R)

    @property
    def rhs(self) -> np.ndarray:
        return np.concatenate([self.F1, self.F2, np.zeros(self.m * self.horizon)])


def _check_dimensions(model: LtiModel, config: ControllerConfig) -> None:
    if config.Q.shape != (model.n, model.n):
        raise ContractViolation(f'Q has shape {config.Q.shape} but model "{model.name}" has {model.n} states')
    if config.R.shape != (model.m, model.m):
        raise ContractViolation(f'R has shape {config.R.shape} but model "{model.name}" has {model.m} inputs')
    if model.p != 2:
        raise ContractViolation(f'Model output must be a 2-D position, got {model.p} outputs')


def weighted_penalty(model: Model, config: ControllerConfig, gamma_sum: float) -> np.ndarray:
    return gamma_sum * model.C.T @ model.C + config.Q


def assemble_kkt(model: LtiModel, config: ControllerConfig, selection: LocalSelection, x) -> KktSystem:
    _check_dimensions(model, config)
    x = np.asarray(x, dtype=float).ravel()
    if x.shape != (model.n,):
        raise ContractViolation(f'State has shape {x.shape}, expected ({model.n},)')
    T = config.horizon
    qbar = weighted_penalty(model, config, selection.gamma_sum)
    f1 = np.tile(selection.gamma_sum * model.C.T @ selection.centroid, T)
    f2 = np.zeros(model.n * T)
    f2[:model.n] = -model.A @ x
    return KktSystem(Qbar=qbar, A=model.A, B=model.B, R=config.R, horizon=T, F1=f1, F2=f2)


def dense_kkt_matrix(kkt: KktSystem) -> np.ndarray:
    nT = kkt.n * kkt.horizon
    mT = kkt.m * kkt.horizon
    E = np.zeros((2 * nT + mT, 2 * nT + mT))
    E[:nT, :nT] = kkt.E11
    E[:nT, nT:2 * nT] = kkt.E12
    E[nT:2 * nT, :nT] = kkt.E12.T
    E[nT:2 * nT, 2 * nT:] = kkt.E23
    E[2 * nT:, nT:2 * nT] = kkt.E23.T
    E[2 * nT:, 2 * nT:] = kkt.E33
    return E


@attr.s(eq=False)
class KktInverse(object):
    inv11 = attr.ib()
    inv12 = attr.ib()
    inv13 = attr.ib()
    inv22 = attr.ib()
    inv23 = attr.ib()
    inv33 = attr.ib()

    def dense(self) -> np.ndarray:
        return np.block([[self.inv11, self.inv12, self.inv13],
                         [self.inv12.T, self.inv22, self.inv23],
                         [self.inv13.T, self.inv23.T, self.inv33]])


def e12_inverse(A: np.ndarray, horizon: int) -> np.ndarray:
    """Inverse of the block-bidiagonal E12 (-I on the diagonal, A^T above it) by block back-substitution.

    Block (i, j) of the result is -(A^T)^(j-i) for j >= i and zero below the diagonal.
    """
    n = A.shape[0]
    P = np.zeros((n * horizon, n * horizon))
    At = A.T
    for i in range(horizon - 1, -1, -1):
        rows = slice(i * n, (i + 1) * n)
        P[rows, i * n:(i + 1) * n] = -np.eye(n)
        if i < horizon - 1:
            below = slice((i + 1) * n, (i + 2) * n)
            P[rows, (i + 1) * n:] = At @ P[below, (i + 1) * n:]
    return P


def invert_structured(kkt: KktSystem) -> KktInverse:
    """Blocks of E^-1 from the closed forms built on W = (E33 + E23^T S E23)^-1, S = P E11 P^T, P = E12^-1.

    P holds powers of A^T up to T - 1, so with an unstable A and a long horizon forming S and the Schur complement
    cancels badly. The assembled inverse is checked against E before it is returned; controls are computed by
    `solve_riccati`.

    Raises:
        ConditioningError: if the Schur complement loses positive definiteness numerically or the assembled inverse
            does not reproduce the identity within `STRUCTURED_INVERSE_TOL`
    """
    P = e12_inverse(kkt.A, kkt.horizon)
    E23 = kkt.E23
    S = P @ kkt.E11 @ P.T
    S = 0.5 * (S + S.T)
    H = kkt.E33 + E23.T @ S @ E23
    try:
        factor = cho_factor(H)
    except LinAlgError:
        raise ConditioningError('Schur complement of the KKT matrix is not numerically positive definite',
                                float(np.linalg.cond(H)))
    W = cho_solve(factor, np.eye(H.shape[0]))
    W = 0.5 * (W + W.T)
    PtE23 = P.T @ E23
    SE23 = S @ E23
    inv13 = -PtE23 @ W
    inv23 = SE23 @ W
    inv11 = PtE23 @ W @ PtE23.T
    inv12 = P.T - PtE23 @ W @ SE23.T
    inv22 = SE23 @ W @ SE23.T - S
    inverse = KktInverse(inv11=inv11, inv12=inv12, inv13=inv13, inv22=inv22, inv23=inv23, inv33=W)
    E = dense_kkt_matrix(kkt)
    error = float(np.abs(E @ inverse.dense() - np.eye(E.shape[0])).max())
    if error > STRUCTURED_INVERSE_TOL:
        raise ConditioningError(f'Structured KKT inverse is inaccurate (max |E E^-1 - I| = {error:.3e})',
                                float(np.linalg.cond(H)))
    return inverse


def solve_kkt(kkt: KktSystem, inverse: KktInverse) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stacked states, multipliers and inputs (x_bar, lambda_bar, u_bar) over the horizon."""
    x_bar = inverse.inv11 @ kkt.F1 + inverse.inv12 @ kkt.F2
    lam_bar = inverse.inv12.T @ kkt.F1 + inverse.inv22 @ kkt.F2
    u_bar = inverse.inv13.T @ kkt.F1 + inverse.inv23.T @ kkt.F2
    return x_bar, lam_bar, u_bar


@attr.s(eq=False)
class RiccatiSweep(object):
    """Backward Riccati sweep over the horizon.

    `P[j]` is the cost-to-go Hessian at stacked state j (1..T, `P[0]` is unused). `K[k]` and `G[k]` are the
    feedback gain and the Cholesky factor of R + B^T P[k+1] B for the transition from state k to k+1.
    """
    P = attr.ib()
    K = attr.ib()
    G = attr.ib()


def _factor_input_hessian(R: np.ndarray, B: np.ndarray, P: np.ndarray):
    G = R + B.T @ P @ B
    G = 0.5 * (G + G.T)
    try:
        return cho_factor(G)
    except LinAlgError:
        raise ConditioningError('Input Hessian of the Riccati sweep is not numerically positive definite',
                                float(np.linalg.cond(G)))


def riccati_sweep(kkt: KktSystem) -> RiccatiSweep:
    """Cost-to-go Hessians and feedback gains of the KKT system, from the terminal state backwards.

    Uses the Joseph form P = Qbar + K^T R K + (A - B K)^T P' (A - B K), which keeps every P symmetric PSD and
    never forms powers of A.
    """
    A, B, T = kkt.A, kkt.B, kkt.horizon
    P = [None] * (T + 1)
    K = [None] * T
    G = [None] * T
    P[T] = kkt.Qbar
    for k in range(T - 1, -1, -1):
        G[k] = _factor_input_hessian(kkt.R, B, P[k + 1])
        K[k] = cho_solve(G[k], B.T @ P[k + 1] @ A)
        if k > 0:
            closed_loop = A - B @ K[k]
            Pk = kkt.Qbar + K[k].T @ kkt.R @ K[k] + closed_loop.T @ P[k + 1] @ closed_loop
            P[k] = 0.5 * (Pk + Pk.T)
    return RiccatiSweep(P=P, K=K, G=G)


def solve_riccati(kkt: KktSystem,
                  sweep: Optional[RiccatiSweep] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Solve the KKT system by a Riccati sweep and a forward rollout.

    The constraint rows read x_{k+1} = A x_k + B u_k - F2_k with x_0 = 0, and the stationarity rows give
    lambda_k = P[k+1] x_{k+1} - p[k+1] where p is the affine part of the cost-to-go.

    Returns:
        (x_bar, lambda_bar, u_bar) stacked over the horizon, in the layout of `solve_kkt`
    """
    if sweep is None:
        sweep = riccati_sweep(kkt)
    A, B, n, T = kkt.A, kkt.B, kkt.n, kkt.horizon
    F1 = kkt.F1.reshape(T, n)
    offsets = -kkt.F2.reshape(T, n)
    p = [None] * (T + 1)
    feedforward = [None] * T
    p[T] = F1[T - 1]
    for k in range(T - 1, -1, -1):
        r = p[k + 1] - sweep.P[k + 1] @ offsets[k]
        feedforward[k] = cho_solve(sweep.G[k], B.T @ r)
        if k > 0:
            p[k] = F1[k - 1] + (A - B @ sweep.K[k]).T @ r
    xs, lams, us = [], [], []
    x = np.zeros(n)
    for k in range(T):
        u = feedforward[k] - sweep.K[k] @ x
        x = A @ x + B @ u + offsets[k]
        us.append(u)
        xs.append(x)
        lams.append(sweep.P[k + 1] @ x - p[k + 1])
    return np.concatenate(xs), np.concatenate(lams), np.concatenate(us)


def kkt_residual(kkt: KktSystem, solution: Tuple[np.ndarray, np.ndarray, np.ndarray]) -> float:
    z = np.concatenate(solution)
    rhs = kkt.rhs
    resid = np.linalg.norm(dense_kkt_matrix(kkt) @ z - rhs)
    scale = np.linalg.norm(rhs)
    return float(resid / scale) if scale > 0 else float(resid)


def check_kkt_residual(kkt: KktSystem, solution: Tuple[np.ndarray, np.ndarray, np.ndarray]) -> None:
    """
    Raises:
        ConditioningError: if the relative KKT residual of `solution` exceeds `KKT_RESIDUAL_TOL`
    """
    residual = kkt_residual(kkt, solution)
    if residual > KKT_RESIDUAL_TOL:
        raise ConditioningError(f'KKT residual {residual:.3e} of the horizon solution exceeds {KKT_RESIDUAL_TOL:g}',
                                float(np.linalg.cond(dense_kkt_matrix(kkt))))


def solve_horizon(model: LtiModel,
                  config: ControllerConfig,
                  selection: LocalSelection,
                  x) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    kkt = assemble_kkt(model, config, selection, x)
    solution = solve_riccati(kkt)
    check_kkt_residual(kkt, solution)
    return solution


def clamp_input(u: np.ndarray, config: ControllerConfig) -> np.ndarray:
    if config.u_max is None:
        return u
    return np.clip(u, -config.u_max, config.u_max)


def optimal_control_lti(model: LtiModel, config: ControllerConfig, selection: LocalSelection, x) -> np.ndarray:
    """First input of the horizon-optimal sequence, clamped to +/- u_max when configured."""
    _, _, u_bar = solve_horizon(model, config, selection, x)
    return clamp_input(u_bar[:model.m], config)


def optimal_control_nonlinear(model: NonlinearModel,
                              config: ControllerConfig,
                              selection: LocalSelection,
                              x) -> np.ndarray:
    """Single-step law u = (R + g^T Qbar g)^-1 g^T (gamma_sum C^T q_bar - Qbar f(x)); the horizon is taken as 1."""
    x = np.asarray(x, dtype=float).ravel()
    if config.R.shape != (model.m, model.m) or config.Q.shape != (model.n, model.n):
        raise ContractViolation(f'Penalty shapes Q {config.Q.shape}, R {config.R.shape} do not match model '
                                f'"{model.name}" (n={model.n}, m={model.m})')
    fx = np.asarray(model.f(x), dtype=float)
    gx = np.asarray(model.g(x), dtype=float)
    qbar = weighted_penalty(model, config, selection.gamma_sum)
    lhs = config.R + gx.T @ qbar @ gx
    rhs = gx.T @ (selection.gamma_sum * model.C.T @ selection.centroid - qbar @ fx)
    u = solve(lhs, rhs, assume_a='pos')
    return clamp_input(u, config)


@attr.s(eq=False)
class LtiGainCache(object):
    """First-input feedforward and feedback gains per weight sum.

    E depends on the selection only through its weight sum, which is the agent-point weight at every step, so
    one Riccati sweep serves the whole run. With F1 the horizon tiling of c = gamma_sum C^T q_bar, the first input
    is u_0 = feedforward c - feedback x. A cache belongs to one agent runtime.
    """
    gains: Dict[float, Tuple[np.ndarray, np.ndarray]] = attr.ib(factory=dict)

    def first_input(self,
                    model: LtiModel,
                    config: ControllerConfig,
                    selection: LocalSelection,
                    x) -> np.ndarray:
        x = np.asarray(x, dtype=float).ravel()
        key = selection.gamma_sum
        if key not in self.gains:
            kkt = assemble_kkt(model, config, selection, x)
            sweep = riccati_sweep(kkt)
            check_kkt_residual(kkt, solve_riccati(kkt, sweep))
            A, B, n, T = model.A, model.B, model.n, config.horizon
            # p[1] = M c where M sums the closed-loop transposes over the later transitions
            M = np.eye(n)
            for k in range(T - 1, 0, -1):
                M = np.eye(n) + (A - B @ sweep.K[k]).T @ M
            feedforward = cho_solve(sweep.G[0], B.T @ M)
            self.gains[key] = (feedforward, sweep.K[0])
            logging.debug('Cached controller gains for weight sum %r (horizon %s)', key, T)
        feedforward, feedback = self.gains[key]
        u = feedforward @ (selection.gamma_sum * model.C.T @ selection.centroid) - feedback @ x
        return clamp_input(u, config)


def optimal_control(model: Model,
                    config: ControllerConfig,
                    selection: LocalSelection,
                    x,
                    cache: Optional[LtiGainCache] = None) -> np.ndarray:
    if isinstance(model, LtiModel):
        if cache is not None:
            return cache.first_input(model, config, selection, x)
        return optimal_control_lti(model, config, selection, x)
    return optimal_control_nonlinear(model, config, selection, x)


def stage_cost(selection: LocalSelection,
               config: ControllerConfig,
               states: np.ndarray,
               inputs: np.ndarray,
               model: Model) -> float:
    """Horizon cost with the local set frozen: terminal cost plus running output-transport, state and input terms.

    Args:
        selection: local sample-points and their weights
        config: penalties
        states: (T+1) x n states starting at the current state
        inputs: T x m inputs
        model: dynamics used to check that `states` follow from `inputs`

    Raises:
        ContractViolation: if the trajectory does not follow the model
    """
    states = np.atleast_2d(np.asarray(states, dtype=float))
    inputs = np.asarray(inputs, dtype=float).reshape(-1, model.m)
    if states.shape[0] != inputs.shape[0] + 1:
        raise ContractViolation(f'{states.shape[0]} states do not match {inputs.shape[0]} inputs')
    for i, u in enumerate(inputs):
        expected = step(model, states[i], u)
        if not np.allclose(states[i + 1], expected, rtol=1e-9, atol=1e-9):
            raise ContractViolation(f'State {i + 1} does not follow from state {i} and input {i}')

    def transport_term(x):
        diffs = model.C @ x - selection.points
        return 0.5 * float(selection.gamma @ np.sum(diffs ** 2, axis=1))

    def state_term(x):
        return 0.5 * float(x @ config.Q @ x)

    running = [transport_term(x) + state_term(x) + 0.5 * float(u @ config.R @ u) for x, u in zip(states[:-1], inputs)]
    terminal = transport_term(states[-1]) + state_term(states[-1])
    return math.fsum(running) + terminal
