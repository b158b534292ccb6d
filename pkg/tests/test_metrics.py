# -*- coding: utf-8 -*-

import numpy as np
import pandas as pd
import pytest

from densecov.const import PLAN_COLS, LEDGER_COLS
from densecov.density import SamplePointCloud
from densecov.exceptions import NoDataError
from densecov.metrics import W2Method, average_remaining_weight, work_redundancy, coverage_wasserstein, \
    compute_metrics, remaining_weight_series, agent_point_distribution
from densecov.sharing.const import SharingMethod
from densecov.sim import SimResult, run_scenario
from . import small_scenario, quadrotor_fleet


def make_result(agent_points, cloud_points, gammas=(1.0,), ledger_rows=((0, 0, 1.0, 1.0),)) -> SimResult:
    """Single-agent result whose logged outputs after the start are `agent_points`."""
    agent_points = np.asarray(agent_points, dtype=float).reshape(-1, 2)
    cloud_points = np.asarray(cloud_points, dtype=float).reshape(-1, 2)
    outputs = np.vstack([[0.0, 0.0], agent_points])
    ks = np.arange(outputs.shape[0])
    trajectories = pd.DataFrame({'agent': 0, 'k': ks, 't': ks * 0.1,
                                 'x0': outputs[:, 0], 'x1': outputs[:, 1],
                                 'px': outputs[:, 0], 'py': outputs[:, 1]})
    plans = pd.DataFrame([(0, i + 1, 0, g) for i, g in enumerate(gammas)], columns=PLAN_COLS)
    n = cloud_points.shape[0]
    cloud = SamplePointCloud(positions=cloud_points, weights=np.full(n, 1.0 / n))
    return SimResult(scenario_id='handmade',
                     seed=0,
                     method=SharingMethod.PROPOSED,
                     alpha=1.0 / max(agent_points.shape[0], 1),
                     dt=0.1,
                     termination_reason='steps-complete',
                     trajectories=trajectories,
                     plans=plans,
                     ledger=pd.DataFrame(list(ledger_rows), columns=LEDGER_COLS),
                     progress=np.zeros((1, n)),
                     cloud=cloud)


def test_average_remaining_weight_example():
    assert average_remaining_weight([np.array([0.5, 0.3]), np.array([0.2])]) == pytest.approx(50.0, abs=1e-12)
    assert average_remaining_weight([np.array([1.0])]) == 100.0
    with pytest.raises(NoDataError):
        average_remaining_weight([])


def test_work_redundancy():
    assert work_redundancy(make_result([[1.0, 1.0]], [[1.0, 1.0]], gammas=(0.6, 0.5))) == pytest.approx(10.0)
    assert work_redundancy(make_result([[1.0, 1.0]], [[1.0, 1.0]], gammas=(0.25, 0.25))) == pytest.approx(-50.0)


def test_w2_zero_when_points_coincide():
    points = [[1.0, 2.0], [3.0, 4.0], [5.0, 1.0], [2.0, 2.0]]
    w2, method = coverage_wasserstein(make_result(points, points))
    assert method == W2Method.EXACT
    assert w2 == pytest.approx(0.0, abs=1e-6)


def test_w2_single_point_distance():
    w2, method = coverage_wasserstein(make_result([[0.0, 0.0]], [[3.0, 4.0]]))
    assert method == W2Method.EXACT
    assert w2 == pytest.approx(5.0, rel=1e-12)


def test_w2_sinkhorn_fallback():
    w2, method = coverage_wasserstein(make_result([[0.0, 0.0]], [[3.0, 4.0]]), exact_limit=0)
    assert method == W2Method.SINKHORN
    assert w2 == pytest.approx(5.0, rel=1e-9)


def test_w2_with_reference_cloud():
    result = make_result([[0.0, 0.0]], [[3.0, 4.0]])
    other = SamplePointCloud(positions=[[0.0, 1.0]], weights=[1.0])
    w2, _ = coverage_wasserstein(result, cloud=other)
    assert w2 == pytest.approx(1.0, rel=1e-12)


def test_no_agent_points():
    result = make_result(np.empty((0, 2)), [[1.0, 1.0]], gammas=())
    with pytest.raises(NoDataError):
        agent_point_distribution(result)
    with pytest.raises(NoDataError):
        compute_metrics(result)


def test_remaining_weight_series():
    rows = [(0, 0, 1.0, 1.0), (0, 1, 1.0, 1.0), (1, 0, 0.8, 0.7), (1, 1, 0.6, 0.7)]
    result = make_result([[1.0, 1.0]], [[1.0, 1.0]], ledger_rows=rows)
    series = remaining_weight_series(result)
    assert series.k.tolist() == [0, 1]
    assert series.avg_remaining.tolist() == pytest.approx([100.0, 70.0])


def test_compute_metrics_on_a_run():
    result = run_scenario(small_scenario(steps=(10, 10, 10), method=SharingMethod.CENTRALIZED))
    report = compute_metrics(result)
    assert report.w2_method == W2Method.EXACT
    assert report.w2 > 0.0
    assert report.n_agent_points == 30
    assert report.work_redundancy == pytest.approx(0.0, abs=1e-9)
    assert report.final_avg_remaining == pytest.approx(0.0, abs=1e-7)
    assert report.avg_remaining[0] == [0, pytest.approx(100.0)]
    d = report.to_dict()
    assert d['scenario_id'] == 'small'
    assert d['method'] == SharingMethod.CENTRALIZED


@pytest.mark.slow
def test_w2_shrinks_with_more_steps():
    medians = []
    for n_steps in (5, 20, 80):
        w2s = [compute_metrics(run_scenario(small_scenario(steps=(n_steps,) * 6, n_samples=300, seed=seed,
                                                           r_comm=2.0))).w2
               for seed in range(10)]
        medians.append(np.median(w2s))
    assert medians[0] > medians[1] > medians[2]


def average_remaining_gap(proposed, centralized) -> float:
    """Mean over ticks of the difference in average remaining weight between two runs, in percent."""
    merged = remaining_weight_series(proposed).merge(remaining_weight_series(centralized), on='k',
                                                     suffixes=('_proposed', '_centralized'))
    return float((merged.avg_remaining_proposed - merged.avg_remaining_centralized).mean())


@pytest.mark.slow
def test_longer_range_narrows_gap_to_centralized():
    gaps = {1.0: [], 2.0: []}
    for seed in range(8):
        centralized = run_scenario(quadrotor_fleet(r_comm=0.0, method=SharingMethod.CENTRALIZED, seed=seed))
        for r_comm in gaps:
            proposed = run_scenario(quadrotor_fleet(r_comm=r_comm, seed=seed))
            gaps[r_comm].append(average_remaining_gap(proposed, centralized))
    assert all(g >= -1e-9 for g in gaps[1.0] + gaps[2.0])
    assert np.median(gaps[2.0]) < np.median(gaps[1.0])


@pytest.mark.slow
def test_progress_sharing_reduces_redundancy():
    redundancy = {SharingMethod.ORIGINAL: [], SharingMethod.PROPOSED: []}
    for seed in range(20):
        for method in redundancy:
            scenario = small_scenario(steps=(12,) * 8, method=method, r_comm=2.0, n_samples=100, seed=seed,
                                      termination='exhausted', max_steps=60)
            redundancy[method].append(compute_metrics(run_scenario(scenario)).work_redundancy)
    assert np.median(redundancy[SharingMethod.PROPOSED]) <= np.median(redundancy[SharingMethod.ORIGINAL])
