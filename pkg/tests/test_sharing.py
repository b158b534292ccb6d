# -*- coding: utf-8 -*-

import numpy as np
import pandas as pd
import pytest

from densecov.const import SNAPSHOT_COLS
from densecov.exceptions import BookkeepingError, ContractViolation
from densecov.sharing import new_ledger, record_own_progress, merge_proposed, merge_original, centralized_remaining, \
    omission_delta, ledgers_agree, ledger_snapshot, write_ledger_snapshot, remaining_from_progress, merge
from densecov.sharing.const import SharingMethod
from densecov.transport import TransportPlan, empty_plan


def plan(indices, amounts) -> TransportPlan:
    return TransportPlan(indices=indices, amounts=amounts, position=[0.0, 0.0], alpha=float(np.sum(amounts)))


def test_record_own_progress():
    ledger = new_ledger(1, np.array([0.5, 0.3, 0.2]), 3)
    record_own_progress(ledger, plan([0, 2], [0.1, 0.2]))
    np.testing.assert_allclose(ledger.beta, [0.4, 0.3, 0.0], rtol=0, atol=1e-15)
    assert ledger.progress[1].tolist() == [0.1, 0.0, 0.2]
    assert not ledger.progress[[0, 2]].any()
    record_own_progress(ledger, empty_plan([0.0, 0.0]))
    assert ledger.progress[1].tolist() == [0.1, 0.0, 0.2]


def test_record_into_another_row():
    ledger = new_ledger(0, np.array([0.5, 0.5]), 2)
    record_own_progress(ledger, plan([1], [0.25]), agent=1)
    assert ledger.progress[1].tolist() == [0.0, 0.25]
    assert ledger.progress[0].tolist() == [0.0, 0.0]


def test_new_ledger_owner_outside_fleet():
    with pytest.raises(ContractViolation):
        new_ledger(2, np.array([1.0]), 2)


def test_proposed_merge_relays_progress():
    beta0 = np.array([0.4, 0.3, 0.3])
    ledgers = [new_ledger(i, beta0, 3) for i in range(3)]
    record_own_progress(ledgers[0], plan([0], [0.2]))
    merge_proposed(ledgers[0], ledgers[1])
    merge_proposed(ledgers[1], ledgers[2])
    # agent 2 never met agent 0 but learns its progress through agent 1
    assert ledgers[2].progress[0].tolist() == [0.2, 0.0, 0.0]
    np.testing.assert_allclose(ledgers[2].beta, [0.2, 0.3, 0.3], rtol=0, atol=1e-15)
    assert ledgers[1].share_count == 2


def test_proposed_merge_is_element_wise_max():
    beta0 = np.array([0.5, 0.5])
    r, s = new_ledger(0, beta0, 2), new_ledger(1, beta0, 2)
    record_own_progress(r, plan([0], [0.1]))
    record_own_progress(s, plan([0, 1], [0.2, 0.05]))
    merge_proposed(r, s)
    assert np.array_equal(r.progress, s.progress)
    assert r.progress.tolist() == [[0.1, 0.0], [0.2, 0.05]]
    np.testing.assert_allclose(r.beta, [0.2, 0.45], rtol=0, atol=1e-15)
    assert np.array_equal(r.beta, s.beta)


def test_original_merge_takes_minimum():
    beta0 = np.array([0.6, 0.5])
    r, s = new_ledger(0, beta0, 2), new_ledger(1, beta0, 2)
    record_own_progress(r, plan([0, 1], [0.2, 0.0]))
    record_own_progress(s, plan([1], [0.3]))
    merge_original(r, s)
    np.testing.assert_allclose(r.beta, [0.4, 0.2], rtol=0, atol=1e-15)
    assert np.array_equal(r.beta, s.beta)
    # progress rows stay private
    assert r.progress[1].tolist() == [0.0, 0.0]
    assert s.progress[0].tolist() == [0.0, 0.0]


def test_original_merge_omits_overlapping_work():
    beta0 = np.array([1.0])
    r, s = new_ledger(0, beta0, 2), new_ledger(1, beta0, 2)
    r_p, s_p = new_ledger(0, beta0, 2), new_ledger(1, beta0, 2)
    for ledger in (r, r_p):
        record_own_progress(ledger, plan([0], [0.3]))
    for ledger in (s, s_p):
        record_own_progress(ledger, plan([0], [0.2]))
    merge_original(r, s)
    merge_proposed(r_p, s_p)
    assert r.beta.tolist() == [0.7]
    assert r_p.beta.tolist() == [0.5]
    np.testing.assert_allclose(omission_delta(r.beta, r_p.progress, beta0), [0.2], rtol=0, atol=1e-15)


def test_merge_rejects_self_and_mismatched_shapes():
    beta0 = np.array([0.5, 0.5])
    with pytest.raises(ContractViolation):
        merge_proposed(new_ledger(0, beta0, 2), new_ledger(0, beta0, 2))
    with pytest.raises(ContractViolation):
        merge_original(new_ledger(0, beta0, 2), new_ledger(1, beta0, 3))


def test_centralized_example():
    beta0 = np.array([0.5, 0.5])
    progress = np.array([[0.3, 0.0], [0.0, 0.2]])
    np.testing.assert_allclose(centralized_remaining(progress, beta0), [0.2, 0.3], rtol=0, atol=1e-15)


def test_centralized_over_transport():
    beta0 = np.array([0.5, 0.5])
    with pytest.raises(BookkeepingError):
        centralized_remaining(np.array([[0.3, 0.0], [0.3, 0.0]]), beta0)
    # rounding noise below the mass tolerance is clamped
    assert centralized_remaining(np.array([[0.5 + 1e-14, 0.0]]), beta0).tolist() == [0.0, 0.5]


def test_remaining_from_progress_clamps():
    beta0 = np.array([0.2, 0.8])
    assert remaining_from_progress(np.array([[0.3, 0.1]]), beta0).tolist()[0] == 0.0


def random_ledger(rng, owner, beta0, n_agents):
    ledger = new_ledger(owner, beta0, n_agents)
    ledger.progress = rng.uniform(0.0, 1.0, size=(n_agents, beta0.shape[0])) * beta0 / n_agents
    ledger.beta = remaining_from_progress(ledger.progress, beta0)
    return ledger


def test_proposed_merge_is_a_semilattice_join():
    rng = np.random.default_rng(12)
    beta0 = rng.uniform(0.1, 1.0, size=6)
    for _ in range(50):
        a, b, c = (random_ledger(rng, i, beta0, 3) for i in range(3))
        pa, pb, pc = a.progress.copy(), b.progress.copy(), c.progress.copy()
        # idempotent
        twin = new_ledger(1, beta0, 3)
        twin.progress = pa.copy()
        twin.beta = a.beta.copy()
        merge_proposed(a, twin)
        assert np.array_equal(a.progress, pa)
        # commutative
        x, y = random_ledger(rng, 0, beta0, 3), random_ledger(rng, 1, beta0, 3)
        x.progress, y.progress = pa.copy(), pb.copy()
        merge_proposed(x, y)
        x2, y2 = random_ledger(rng, 0, beta0, 3), random_ledger(rng, 1, beta0, 3)
        x2.progress, y2.progress = pa.copy(), pb.copy()
        merge_proposed(y2, x2)
        assert np.array_equal(x.progress, x2.progress)
        # associative
        ab = np.maximum(np.maximum(pa, pb), pc)
        bc = np.maximum(pa, np.maximum(pb, pc))
        b.progress, c.progress = pb.copy(), pc.copy()
        a.progress = pa.copy()
        merge_proposed(b, c)
        merge_proposed(a, b)
        assert np.array_equal(a.progress, ab)
        assert np.array_equal(a.progress, bc)


def test_ledgers_agree():
    beta0 = np.array([0.5, 0.5])
    r, s = new_ledger(0, beta0, 2), new_ledger(1, beta0, 2)
    assert ledgers_agree(r, s)
    record_own_progress(r, plan([0], [0.1]))
    assert not ledgers_agree(r, s)
    merge_original(r, s)
    # the min rule leaves progress rows apart, so only the remaining weights are compared
    assert ledgers_agree(r, s, compare_progress=False)
    assert not ledgers_agree(r, s, compare_progress=True)


def _random_plan(rng, true_beta):
    available = np.flatnonzero(true_beta > 1e-6)
    if available.size == 0:
        return None
    picks = rng.choice(available, size=min(available.size, int(rng.integers(1, 4))), replace=False)
    amounts = rng.uniform(0.0, 1.0, size=picks.size) * true_beta[picks]
    return plan(picks, amounts)


def test_replayed_histories_order_the_three_methods():
    rng = np.random.default_rng(99)
    for _ in range(50):
        n_agents = int(rng.integers(2, 6))
        n_points = int(rng.integers(1, 9))
        beta0 = rng.uniform(0.1, 1.0, size=n_points)
        beta0 /= beta0.sum()
        original = [new_ledger(i, beta0, n_agents) for i in range(n_agents)]
        proposed = [new_ledger(i, beta0, n_agents) for i in range(n_agents)]
        true_progress = np.zeros((n_agents, n_points))
        for _ in range(int(rng.integers(5, 40))):
            if rng.uniform() < 0.6:
                agent = int(rng.integers(n_agents))
                event = _random_plan(rng, centralized_remaining(true_progress, beta0))
                if event is None:
                    continue
                record_own_progress(original[agent], event)
                record_own_progress(proposed[agent], event)
                np.add.at(true_progress[agent], event.indices, event.amounts)
            else:
                r, s = rng.choice(n_agents, size=2, replace=False)
                merge_original(original[r], original[s])
                merge_proposed(proposed[r], proposed[s])
            truth = centralized_remaining(true_progress, beta0)
            for o, p in zip(original, proposed):
                assert np.all(truth <= p.beta + 1e-9)
                assert np.all(p.beta <= o.beta + 1e-9)
                assert np.all(omission_delta(o.beta, p.progress, beta0) >= -1e-9)


def test_snapshot(tmp_path):
    beta0 = np.array([0.5, 0.5])
    r, s = new_ledger(0, beta0, 2), new_ledger(1, beta0, 2)
    record_own_progress(r, plan([1], [0.25]))
    merge_proposed(r, s)
    df = ledger_snapshot([r, s])
    assert df.columns.tolist() == SNAPSHOT_COLS
    assert df.shape[0] == 2
    assert df['row_agent'].tolist() == [0, 0]
    assert df['sample_index'].tolist() == [1, 1]
    path = str(tmp_path / 'progress.csv')
    write_ledger_snapshot([r, s], path)
    loaded = pd.read_csv(path)
    assert loaded['gamma'].tolist() == [0.25, 0.25]
    assert ledger_snapshot([]).columns.tolist() == SNAPSHOT_COLS


def test_merge_dispatch():
    beta0 = np.array([0.5, 0.5])
    r, s = new_ledger(0, beta0, 2), new_ledger(1, beta0, 2)
    record_own_progress(r, plan([0], [0.1]))
    merge(SharingMethod.PROPOSED, r, s)
    assert s.progress[0].tolist() == [0.1, 0.0]
    with pytest.raises(ContractViolation):
        merge(SharingMethod.CENTRALIZED, r, s)
