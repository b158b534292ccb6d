# -*- coding: utf-8 -*-
"""
Optimal-transport kernels: the single-sink weight-update plan, its application to remaining weights and
2-Wasserstein distances between weighted point clouds.
"""
import logging
import math
from typing import Optional, Tuple

import attr
import numpy as np
import ot
from scipy.spatial.distance import cdist

from .const import MASS_TOL, DEFAULT_EXACT_LIMIT, DEFAULT_SINKHORN_EPS_FACTOR, DEFAULT_SINKHORN_MAX_ITERS, \
    DEFAULT_SINKHORN_TOL
from .exceptions import InsufficientMassError, ContractViolation, TransportSizeError
from .parsers import read_xyw_table, write_xyw_table


@attr.s(eq=False)
class TransportPlan(object):
    indices = attr.ib(converter=lambda x: np.asarray(x, dtype=int).ravel())
    amounts = attr.ib(converter=lambda x: np.asarray(x, dtype=float).ravel())
    position = attr.ib(converter=lambda x: np.asarray(x, dtype=float).ravel())
    alpha = attr.ib(default=0.0, converter=float)

    @amounts.validator
    def _validate_amounts(self, attribute, value):
        if value.shape != self.indices.shape:
            raise ContractViolation(f'Plan has {self.indices.shape[0]} indices but {value.shape[0]} amounts')

    @property
    def total(self) -> float:
        return math.fsum(self.amounts)

    def is_empty(self) -> bool:
        return self.indices.shape[0] == 0


def empty_plan(position, n_dim: int = 2) -> TransportPlan:
    return TransportPlan(indices=np.empty(0, dtype=int),
                         amounts=np.empty(0),
                         position=np.asarray(position, dtype=float).reshape(n_dim),
                         alpha=0.0)


@attr.s(eq=False)
class DiscreteDistribution(object):
    positions = attr.ib(converter=lambda x: np.asarray(x, dtype=float).reshape(-1, 2))
    weights = attr.ib(converter=lambda x: np.asarray(x, dtype=float).ravel())

    @weights.validator
    def _validate_weights(self, attribute, value):
        if value.shape[0] != self.positions.shape[0]:
            raise ValueError(f'{self.positions.shape[0]} atoms but {value.shape[0]} weights')
        if value.shape[0] == 0:
            raise ValueError('Distribution has no atoms')
        if np.any(value <= 0.0):
            raise ValueError('Distribution weights must be positive')
        total = math.fsum(value)
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f'Distribution weights must sum to 1 (within {MASS_TOL}), got {total!r}')

    @property
    def n(self) -> int:
        return self.positions.shape[0]


@attr.s(frozen=True)
class SinkhornResult(object):
    value = attr.ib(converter=float)
    n_iters = attr.ib(converter=int)
    marginal_error = attr.ib(converter=float)
    converged = attr.ib(converter=bool)
    epsilon = attr.ib(converter=float)


def greedy_fill(distance: np.ndarray,
                candidates: np.ndarray,
                beta: np.ndarray,
                alpha: float) -> Tuple[np.ndarray, np.ndarray]:
    """Fill mass `alpha` from `candidates` in ascending `distance` order.

    Ties are broken by ascending index. Every selected point gives all of its weight except the last, which
    gives the residual so that the amounts sum to `alpha`.

    Args:
        distance: ranking key per candidate
        candidates: indices into `beta`, aligned with `distance`
        beta: remaining weights
        alpha: mass to fill

    Returns:
        (selected indices in fill order, amounts)

    Raises:
        InsufficientMassError: if `alpha` exceeds the candidates' total weight by more than 1e-12
    """
    if not alpha > 0.0:
        raise ContractViolation(f'Mass to fill must be positive, got {alpha}')
    if candidates.shape[0] == 0:
        raise InsufficientMassError(f'Requested mass {alpha!r} but no sample-point has remaining weight')
    supply = beta[candidates]
    total = math.fsum(supply)
    if alpha > total + MASS_TOL:
        raise InsufficientMassError(f'Requested mass {alpha!r} exceeds the remaining weight {total!r}')
    order = np.lexsort((candidates, distance))
    ordered = candidates[order]
    cumulative = np.cumsum(beta[ordered])
    last = min(int(np.searchsorted(cumulative, alpha, side='left')), ordered.shape[0] - 1)
    selected = ordered[:last + 1]
    amounts = beta[selected].copy()
    residual = alpha - math.fsum(amounts[:-1])
    while residual <= 0.0 and amounts.shape[0] > 1:
        # rounding put the prefix at or above alpha; drop the surplus point
        selected = selected[:-1]
        amounts = amounts[:-1]
        residual = alpha - math.fsum(amounts[:-1])
    amounts[-1] = residual
    return selected, amounts


def weight_update_plan(y_next, beta: np.ndarray, positions: np.ndarray, alpha: float) -> TransportPlan:
    """Cheapest way to move mass `alpha` from the sample-points onto the agent-point at `y_next`.

    The single-sink transportation problem min sum_j g_j |y - q_j|^2 s.t. sum_j g_j = alpha, 0 <= g_j <= beta_j
    is a fractional knapsack, so filling in ascending squared distance is optimal.
    """
    y_next = np.asarray(y_next, dtype=float).ravel()
    candidates = np.flatnonzero(beta > 0.0)
    sq_dist = np.sum((positions[candidates] - y_next) ** 2, axis=1)
    indices, amounts = greedy_fill(sq_dist, candidates, beta, alpha)
    return TransportPlan(indices=indices, amounts=amounts, position=y_next, alpha=alpha)


def plan_cost(plan: TransportPlan, positions: np.ndarray) -> float:
    if plan.is_empty():
        return 0.0
    sq_dist = np.sum((positions[plan.indices] - plan.position) ** 2, axis=1)
    return math.fsum(plan.amounts * sq_dist)


def apply_transport(beta: np.ndarray, plan: TransportPlan) -> np.ndarray:
    """Remaining weights after removing the planned mass; results within -1e-12 of zero are clamped to 0.

    Raises:
        ContractViolation: if the plan takes more than a sample-point holds
    """
    out = np.array(beta, dtype=float)
    if plan.is_empty():
        return out
    if np.any(plan.amounts < 0.0):
        raise ContractViolation('Transport plan has negative amounts')
    np.subtract.at(out, plan.indices, plan.amounts)
    if np.any(out < -MASS_TOL):
        j = int(np.argmin(out))
        raise ContractViolation(f'Transport plan exceeds the supply of sample-point {j} by {-out[j]!r}')
    np.maximum(out, 0.0, out=out)
    return out


def _check_limit(a: DiscreteDistribution, b: DiscreteDistribution, exact_limit: int) -> None:
    if a.n > exact_limit or b.n > exact_limit:
        raise TransportSizeError(f'Exact 2-Wasserstein is limited to {exact_limit} atoms per side, got '
                                 f'{a.n} x {b.n}; use wasserstein2_sinkhorn instead')


def wasserstein2_exact(a: DiscreteDistribution,
                       b: DiscreteDistribution,
                       exact_limit: int = DEFAULT_EXACT_LIMIT) -> float:
    """2-Wasserstein distance from the exact balanced transportation problem (network simplex)."""
    _check_limit(a, b, exact_limit)
    if a.n == b.n and np.array_equal(a.positions, b.positions) and np.array_equal(a.weights, b.weights):
        return 0.0
    cost_matrix = cdist(a.positions, b.positions, metric='sqeuclidean')
    cost = ot.emd2(a.weights, b.weights, cost_matrix, numItermax=1_000_000)
    return math.sqrt(max(float(cost), 0.0))


def _atoms_diameter(a: DiscreteDistribution, b: DiscreteDistribution) -> float:
    pts = np.vstack([a.positions, b.positions])
    return float(np.hypot(*(pts.max(axis=0) - pts.min(axis=0))))


def wasserstein2_sinkhorn(a: DiscreteDistribution,
                          b: DiscreteDistribution,
                          epsilon: Optional[float] = None,
                          max_iters: int = DEFAULT_SINKHORN_MAX_ITERS,
                          tol: float = DEFAULT_SINKHORN_TOL) -> SinkhornResult:
    """Entropic-regularized 2-Wasserstein estimate using the log-domain Sinkhorn solver.

    The returned value is the square root of the transport cost of the regularized plan. When `epsilon` is
    not given it defaults to 1e-3 times the squared diameter of the atoms' bounding box.
    """
    if epsilon is None:
        diameter = _atoms_diameter(a, b)
        epsilon = DEFAULT_SINKHORN_EPS_FACTOR * diameter ** 2 if diameter > 0 else DEFAULT_SINKHORN_EPS_FACTOR
    if not epsilon > 0:
        raise ValueError(f'Sinkhorn regularization must be positive, got {epsilon}')
    cost_matrix = cdist(a.positions, b.positions, metric='sqeuclidean')
    plan, log = ot.bregman.sinkhorn_log(a.weights, b.weights, cost_matrix, epsilon,
                                        numItermax=max_iters, stopThr=tol, log=True, warn=False)
    marginal_error = max(float(np.linalg.norm(plan.sum(axis=1) - a.weights)),
                         float(np.linalg.norm(plan.sum(axis=0) - b.weights)))
    converged = marginal_error < tol
    value = math.sqrt(max(float(np.sum(plan * cost_matrix)), 0.0))
    if not converged:
        logging.warning('Sinkhorn did not reach marginal tolerance %s after %s iterations (error %.3e, eps=%s)',
                        tol, log.get('niter', max_iters), marginal_error, epsilon)
    return SinkhornResult(value=value,
                          n_iters=log.get('niter', max_iters),
                          marginal_error=marginal_error,
                          converged=converged,
                          epsilon=epsilon)


def read_distribution(path: str) -> DiscreteDistribution:
    df = read_xyw_table(path)
    return DiscreteDistribution(positions=df[['x', 'y']].values, weights=df['weight'].values)


def write_distribution(dist: DiscreteDistribution, path: str) -> None:
    write_xyw_table(path, dist.positions, dist.weights)
