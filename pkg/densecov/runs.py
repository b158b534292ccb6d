# -*- coding: utf-8 -*-
"""
Run directories: per-agent trajectory CSVs, ledger and plan tables, the sample-point cloud and a manifest.
"""
import logging
import os
from typing import List, Optional

import numpy as np
import pandas as pd

from .const import FLOAT_FORMAT, TRAJECTORY_FILE_TMPL, REGEX_TRAJECTORY_FILE, MANIFEST_FILE, TIMING_FILE, \
    LEDGER_FILE, PLANS_FILE, PROGRESS_FILE, CLOUD_FILE, PLAN_COLS, LEDGER_COLS, SNAPSHOT_COLS
from .density import read_cloud, write_cloud
from .exceptions import NoDataError
from .parsers import write_json, read_json, read_csv_table
from .scenario import Scenario
from .sim import SimResult
from .utils import check_output_files

kwargs_for_pd_to_csv = dict(index=None, float_format=FLOAT_FORMAT)


def run_output_files(result: SimResult, what) -> List[str]:
    files = [MANIFEST_FILE, TIMING_FILE]
    if 'trajectories' in what:
        files += [TRAJECTORY_FILE_TMPL.format(i) for i in range(result.n_agents)]
    if 'ledger' in what:
        files.append(LEDGER_FILE)
    if 'plans' in what:
        files.append(PLANS_FILE)
    if 'progress' in what:
        files.append(PROGRESS_FILE)
    if 'cloud' in what:
        files.append(CLOUD_FILE)
    return files


def run_manifest(result: SimResult, scenario: Scenario, files: List[str]) -> dict:
    return dict(scenario_id=result.scenario_id,
                seed=int(result.seed),
                method=result.method,
                r_comm=scenario.r_comm,
                dt=result.dt,
                alpha=float(result.alpha),
                n_agents=result.n_agents,
                n_samples=int(result.cloud.n),
                steps=[a.steps for a in scenario.agents],
                models=[a.kind.name for a in scenario.agents],
                termination=scenario.termination,
                termination_reason=result.termination_reason,
                agent_reasons=list(result.agent_reasons),
                exchanges=int(result.exchanges),
                config_hash=scenario.config_hash,
                files=[f for f in files if f not in (MANIFEST_FILE, TIMING_FILE)])


def write_run(result: SimResult, scenario: Scenario, out_dir: str, force: bool = False) -> List[str]:
    """Write a run directory. Existing files are only overwritten with `force`.

    Returns:
        written file names
    """
    what = scenario.output_what
    files = run_output_files(result, what)
    os.makedirs(out_dir, exist_ok=True)
    check_output_files(out_dir, files, force)
    if 'trajectories' in what:
        for agent in range(result.n_agents):
            df = result.agent_trajectory(agent).drop(columns=['agent'])
            df.to_csv(os.path.join(out_dir, TRAJECTORY_FILE_TMPL.format(agent)), **kwargs_for_pd_to_csv)
    if 'ledger' in what:
        result.ledger.to_csv(os.path.join(out_dir, LEDGER_FILE), **kwargs_for_pd_to_csv)
    if 'plans' in what:
        result.plans.to_csv(os.path.join(out_dir, PLANS_FILE), **kwargs_for_pd_to_csv)
    if 'progress' in what:
        snapshot = result.snapshot if result.snapshot is not None else pd.DataFrame(columns=SNAPSHOT_COLS)
        snapshot.to_csv(os.path.join(out_dir, PROGRESS_FILE), **kwargs_for_pd_to_csv)
    if 'cloud' in what:
        write_cloud(result.cloud, os.path.join(out_dir, CLOUD_FILE))
    write_json(os.path.join(out_dir, MANIFEST_FILE), run_manifest(result, scenario, files))
    # wall time is kept out of the manifest so reruns produce identical manifests
    write_json(os.path.join(out_dir, TIMING_FILE), dict(wall_time=float(result.wall_time)))
    logging.info('Wrote %s files for run "%s" (seed %s) to "%s"', len(files), result.scenario_id, result.seed,
                 out_dir)
    return files


def read_run(run_dir: str, cloud_path: Optional[str] = None) -> SimResult:
    """Rebuild a SimResult from a run directory.

    Args:
        run_dir: directory written by `write_run`
        cloud_path: reference cloud CSV; defaults to the run's own cloud file

    Raises:
        NoDataError: if the manifest or a table needed for metrics is missing
    """
    manifest_path = os.path.join(run_dir, MANIFEST_FILE)
    if not os.path.exists(manifest_path):
        raise NoDataError(f'No run manifest "{manifest_path}"')
    manifest = read_json(manifest_path)
    cloud_path = cloud_path or os.path.join(run_dir, CLOUD_FILE)
    if not os.path.exists(cloud_path):
        raise NoDataError(f'No reference sample-point cloud "{cloud_path}"')
    cloud = read_cloud(cloud_path)

    frames = []
    for filename in sorted(os.listdir(run_dir)):
        m = REGEX_TRAJECTORY_FILE.match(filename)
        if m:
            df = read_csv_table(os.path.join(run_dir, filename))
            df.insert(0, 'agent', int(m.group(1)))
            frames.append(df)
    if not frames:
        raise NoDataError(f'Run directory "{run_dir}" has no trajectory files')
    trajectories = pd.concat(frames, ignore_index=True, sort=False).sort_values(['agent', 'k'], kind='mergesort')
    state_cols = sorted([c for c in trajectories.columns if c.startswith('x')], key=lambda c: int(c[1:]))
    trajectories = trajectories[['agent', 'k', 't'] + state_cols + ['px', 'py']].reset_index(drop=True)

    plans_path = os.path.join(run_dir, PLANS_FILE)
    if not os.path.exists(plans_path):
        raise NoDataError(f'Run directory "{run_dir}" has no transport plans file')
    plans = read_csv_table(plans_path)[PLAN_COLS]
    ledger_path = os.path.join(run_dir, LEDGER_FILE)
    ledger = read_csv_table(ledger_path)[LEDGER_COLS] if os.path.exists(ledger_path) \
        else pd.DataFrame(columns=LEDGER_COLS)
    snapshot_path = os.path.join(run_dir, PROGRESS_FILE)
    snapshot = read_csv_table(snapshot_path)[SNAPSHOT_COLS] if os.path.exists(snapshot_path) else None

    n_agents = int(manifest['n_agents'])
    progress = np.zeros((n_agents, cloud.n))
    np.add.at(progress, (plans['agent'].values.astype(int), plans['sample_index'].values.astype(int)),
              plans['gamma'].values)
    timing_path = os.path.join(run_dir, TIMING_FILE)
    wall_time = float(read_json(timing_path)['wall_time']) if os.path.exists(timing_path) else 0.0
    return SimResult(scenario_id=manifest['scenario_id'],
                     seed=int(manifest['seed']),
                     method=manifest['method'],
                     alpha=float(manifest['alpha']),
                     dt=float(manifest['dt']),
                     termination_reason=manifest['termination_reason'],
                     trajectories=trajectories,
                     plans=plans,
                     ledger=ledger,
                     progress=progress,
                     cloud=cloud,
                     agent_reasons=list(manifest.get('agent_reasons', [])),
                     exchanges=int(manifest.get('exchanges', 0)),
                     wall_time=wall_time,
                     snapshot=snapshot,
                     r_comm=manifest.get('r_comm'),
                     agent_steps=[int(s) for s in manifest.get('steps', [])])
