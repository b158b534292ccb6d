# -*- coding: utf-8 -*-
"""
Coverage quality and weight-sharing efficiency of finished runs.
"""
import logging
import math
from typing import Iterable, Optional, Tuple, Dict, Any

import attr
import numpy as np
import pandas as pd

from .const import DEFAULT_EXACT_LIMIT
from .density import SamplePointCloud
from .exceptions import NoDataError
from .sim import SimResult
from .transport import DiscreteDistribution, wasserstein2_exact, wasserstein2_sinkhorn


class W2Method:
    EXACT = 'exact'
    SINKHORN = 'sinkhorn'


@attr.s
class MetricsReport(object):
    scenario_id = attr.ib(validator=attr.validators.instance_of(str))
    seed = attr.ib(validator=attr.validators.instance_of(int))
    method = attr.ib(validator=attr.validators.instance_of(str))
    w2 = attr.ib(validator=attr.validators.instance_of(float))
    w2_method = attr.ib(validator=attr.validators.in_([W2Method.EXACT, W2Method.SINKHORN]))
    work_redundancy = attr.ib(validator=attr.validators.instance_of(float))
    final_avg_remaining = attr.ib(validator=attr.validators.instance_of(float))
    wall_time = attr.ib(validator=attr.validators.instance_of(float))
    n_agent_points = attr.ib(validator=attr.validators.instance_of(int))
    termination_reason = attr.ib(default=None)
    avg_remaining = attr.ib(factory=list, repr=False)

    @w2.validator
    def _validate_w2(self, attribute, value):
        if value < 0:
            raise ValueError(f'2-Wasserstein distance must be nonnegative, got {value}')

    def to_dict(self) -> Dict[str, Any]:
        return attr.asdict(self)


def agent_point_distribution(result: SimResult) -> DiscreteDistribution:
    """Logged agent outputs after the initial position, each carrying the agent-point weight.

    Runs that did not transport exactly one unit of agent-point mass are renormalized to a probability
    distribution.

    Raises:
        NoDataError: if no agent took a step
    """
    df = result.trajectories[result.trajectories.k >= 1]
    if df.shape[0] == 0:
        raise NoDataError(f'Run "{result.scenario_id}" (seed {result.seed}) has no agent-points')
    count = df.shape[0]
    if abs(result.alpha * count - 1.0) > 1e-9:
        logging.warning('Run "%s" logged %s agent-points of weight %r (total %r); renormalizing to 1',
                        result.scenario_id, count, result.alpha, result.alpha * count)
    return DiscreteDistribution(positions=df[['px', 'py']].values, weights=np.full(count, 1.0 / count))


def coverage_wasserstein(result: SimResult,
                         cloud: Optional[SamplePointCloud] = None,
                         exact_limit: int = DEFAULT_EXACT_LIMIT,
                         epsilon: Optional[float] = None) -> Tuple[float, str]:
    """2-Wasserstein distance between the agent-point cloud and the reference sample-points.

    The exact solver is used when both sides have at most `exact_limit` atoms; Sinkhorn otherwise.

    Returns:
        (distance in meters, solver used)
    """
    cloud = cloud or result.cloud
    agent_points = agent_point_distribution(result)
    reference = DiscreteDistribution(positions=cloud.positions, weights=cloud.weights)
    if agent_points.n <= exact_limit and reference.n <= exact_limit:
        return wasserstein2_exact(agent_points, reference, exact_limit), W2Method.EXACT
    logging.warning('Agent-points (%s) or sample-points (%s) exceed the exact limit %s; using Sinkhorn',
                    agent_points.n, reference.n, exact_limit)
    res = wasserstein2_sinkhorn(agent_points, reference, epsilon=epsilon)
    return res.value, W2Method.SINKHORN


def average_remaining_weight(betas: Iterable[np.ndarray]) -> float:
    """Mean over agents of the total remaining weight, in percent."""
    totals = [math.fsum(np.asarray(b, dtype=float)) for b in betas]
    if not totals:
        raise NoDataError('No ledgers to average')
    return math.fsum(totals) / len(totals) * 100.0


def remaining_weight_series(result: SimResult) -> pd.DataFrame:
    df = result.ledger.groupby('k', sort=True)['remaining'].mean() * 100.0
    return df.reset_index().rename(columns={'remaining': 'avg_remaining'})


def work_redundancy(result: SimResult) -> float:
    """Total transported mass across all agents and steps minus 1, in percent."""
    return (math.fsum(result.plans['gamma'].values) - 1.0) * 100.0


def compute_metrics(result: SimResult,
                    cloud: Optional[SamplePointCloud] = None,
                    exact_limit: int = DEFAULT_EXACT_LIMIT,
                    epsilon: Optional[float] = None) -> MetricsReport:
    w2, w2_method = coverage_wasserstein(result, cloud, exact_limit, epsilon)
    series = remaining_weight_series(result)
    if series.shape[0] == 0:
        raise NoDataError(f'Run "{result.scenario_id}" (seed {result.seed}) has no ledger time series')
    report = MetricsReport(scenario_id=result.scenario_id,
                           seed=int(result.seed),
                           method=result.method,
                           w2=float(w2),
                           w2_method=w2_method,
                           work_redundancy=float(work_redundancy(result)),
                           final_avg_remaining=float(series.avg_remaining.iloc[-1]),
                           wall_time=float(result.wall_time),
                           n_agent_points=int((result.trajectories.k >= 1).sum()),
                           termination_reason=result.termination_reason,
                           avg_remaining=[[int(k), float(v)] for k, v in zip(series.k, series.avg_remaining)])
    logging.info('Metrics for "%s" (seed %s, %s): W2=%.6g (%s), work redundancy=%.6g%%',
                 report.scenario_id, report.seed, report.method, report.w2, report.w2_method,
                 report.work_redundancy)
    return report
