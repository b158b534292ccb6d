# -*- coding: utf-8 -*-
"""
Per-agent coverage bookkeeping: remaining weights and the coverage-progress matrix exchanged between agents.
"""
from typing import Tuple, List, Optional

import attr
import numpy as np
import pandas as pd

from ..const import MASS_TOL, SNAPSHOT_COLS, FLOAT_FORMAT
from ..exceptions import ContractViolation, BookkeepingError
from ..transport import TransportPlan, apply_transport


@attr.s(eq=False)
class CoverageLedger(object):
    """Remaining weights `beta` of every sample-point as known to agent `owner`.

    Row l of `progress` is the cumulative mass agent l has transported from each sample-point, as far as the
    owner knows. The owner's own row is always exact.
    """
    owner = attr.ib(validator=attr.validators.instance_of(int))
    beta0 = attr.ib(repr=False)
    beta = attr.ib(repr=False)
    progress = attr.ib(repr=False)
    share_count = attr.ib(default=0, validator=attr.validators.instance_of(int))

    @property
    def n_agents(self) -> int:
        return self.progress.shape[0]

    @property
    def remaining(self) -> float:
        return float(np.sum(self.beta))


def new_ledger(owner: int, beta0: np.ndarray, n_agents: int) -> CoverageLedger:
    beta0 = np.asarray(beta0, dtype=float)
    if not 0 <= owner < n_agents:
        raise ContractViolation(f'Ledger owner {owner} is outside the fleet of {n_agents} agents')
    return CoverageLedger(owner=owner,
                          beta0=beta0.copy(),
                          beta=beta0.copy(),
                          progress=np.zeros((n_agents, beta0.shape[0])))


def record_own_progress(ledger: CoverageLedger, plan: TransportPlan, agent: Optional[int] = None) -> CoverageLedger:
    """Add transported mass to a progress row and remove it from the remaining weights.

    The row is the owner's unless `agent` is given, which only a fleet-wide shared ledger needs.
    """
    if plan.is_empty():
        return ledger
    row = ledger.owner if agent is None else agent
    ledger.beta = apply_transport(ledger.beta, plan)
    np.add.at(ledger.progress[row], plan.indices, plan.amounts)
    return ledger


def _check_pair(ledger_r: CoverageLedger, ledger_s: CoverageLedger) -> None:
    if ledger_r.progress.shape != ledger_s.progress.shape:
        raise ContractViolation(f'Cannot merge ledgers of shape {ledger_r.progress.shape} and '
                                f'{ledger_s.progress.shape}')
    if ledger_r.owner == ledger_s.owner:
        raise ContractViolation(f'Agent {ledger_r.owner} cannot share with itself')


def remaining_from_progress(progress: np.ndarray, beta0: np.ndarray) -> np.ndarray:
    return np.maximum(beta0 - progress.sum(axis=0), 0.0)


def merge_proposed(ledger_r: CoverageLedger, ledger_s: CoverageLedger) -> Tuple[CoverageLedger, CoverageLedger]:
    """Element-wise max of both progress matrices, then remaining weights rebuilt from the merged progress."""
    _check_pair(ledger_r, ledger_s)
    merged = np.maximum(ledger_r.progress, ledger_s.progress)
    beta = remaining_from_progress(merged, ledger_r.beta0)
    for ledger in (ledger_r, ledger_s):
        ledger.progress = merged.copy()
        ledger.beta = beta.copy()
        ledger.share_count += 1
    return ledger_r, ledger_s


def merge_original(ledger_r: CoverageLedger, ledger_s: CoverageLedger) -> Tuple[CoverageLedger, CoverageLedger]:
    """Both agents adopt the element-wise minimum of their remaining weights; progress rows are not exchanged."""
    _check_pair(ledger_r, ledger_s)
    beta = np.minimum(ledger_r.beta, ledger_s.beta)
    for ledger in (ledger_r, ledger_s):
        ledger.beta = beta.copy()
        ledger.share_count += 1
    return ledger_r, ledger_s


def centralized_remaining(global_progress: np.ndarray, beta0: np.ndarray) -> np.ndarray:
    """Remaining weights when every agent's own progress is known to everyone.

    Raises:
        BookkeepingError: if more mass was transported from a sample-point than it ever held
    """
    remaining = np.asarray(beta0, dtype=float) - np.asarray(global_progress, dtype=float).sum(axis=0)
    if np.any(remaining < -MASS_TOL):
        j = int(np.argmin(remaining))
        raise BookkeepingError(f'Sample-point {j} was over-transported by {-remaining[j]!r}')
    return np.maximum(remaining, 0.0)


def omission_delta(beta_original: np.ndarray, shadow_progress: np.ndarray, beta0: np.ndarray) -> np.ndarray:
    """Excess remaining weight of the min rule over max-merged progress on the same history."""
    return np.asarray(beta_original, dtype=float) - (np.asarray(beta0, dtype=float) -
                                                     np.asarray(shadow_progress, dtype=float).sum(axis=0))


def ledgers_agree(ledger_r: CoverageLedger, ledger_s: CoverageLedger, compare_progress: bool = True) -> bool:
    """Whether merging would change nothing. Under the min rule only the remaining weights are exchanged."""
    if not np.array_equal(ledger_r.beta, ledger_s.beta):
        return False
    return not compare_progress or np.array_equal(ledger_r.progress, ledger_s.progress)


def ledger_snapshot(ledgers: List[CoverageLedger]) -> pd.DataFrame:
    """Non-zero progress entries of every ledger as rows of (agent, row_agent, sample_index, gamma)."""
    frames = []
    for ledger in ledgers:
        rows, cols = np.nonzero(ledger.progress)
        frames.append(pd.DataFrame({'agent': ledger.owner,
                                    'row_agent': rows,
                                    'sample_index': cols,
                                    'gamma': ledger.progress[rows, cols]}))
    if not frames:
        return pd.DataFrame(columns=SNAPSHOT_COLS)
    return pd.concat(frames, ignore_index=True)[SNAPSHOT_COLS]


def write_ledger_snapshot(ledgers: List[CoverageLedger], path: str) -> None:
    ledger_snapshot(ledgers).to_csv(path, index=None, float_format=FLOAT_FORMAT)
