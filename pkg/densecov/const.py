# -*- coding: utf-8 -*-

import re
from importlib import resources

from densecov import program_name


def _scenario_file(name: str) -> str:
    return str(resources.files(program_name).joinpath(f'data/scenarios/{name}.json'))


BUILTIN_SCENARIOS = {'integrator-coverage': {'file': _scenario_file('integrator-coverage'),
                                             'description': '6 single integrators over a 100 m x 100 m mixture map'},
                     'quadrotor-coverage': {'file': _scenario_file('quadrotor-coverage'),
                                            'description': '6 planar quadrotors with a 25 m communication range'},
                     'quadrotor-sharing': {'file': _scenario_file('quadrotor-sharing'),
                                           'description': '20 planar quadrotors, weight-sharing comparison'},
                     'energy-flexibility': {'file': _scenario_file('energy-flexibility'),
                                            'description': '2 integrators with 20 s and 200 s of operation'}}

# numerical tolerances
MASS_TOL = 1e-12
EXHAUSTED_MASS = 1e-9
KKT_RESIDUAL_TOL = 1e-8
STRUCTURED_INVERSE_TOL = 1e-6
MIN_ACCEPTANCE_RATE = 1e-6
MIN_PROPOSALS_FOR_DEGENERACY = 2_000_000
DEFAULT_EXACT_LIMIT = 500
DEFAULT_SINKHORN_EPS_FACTOR = 1e-3
DEFAULT_SINKHORN_MAX_ITERS = 10000
DEFAULT_SINKHORN_TOL = 1e-9

# output tables
CLOUD_COLS = ['x', 'y', 'weight']
PLAN_COLS = ['agent', 'k', 'sample_index', 'gamma']
LEDGER_COLS = ['k', 'agent', 'remaining', 'true_remaining']
SNAPSHOT_COLS = ['agent', 'row_agent', 'sample_index', 'gamma']
BATCH_COLS = ['scenario_id',
              'seed',
              'method',
              'r_comm',
              'terminal_steps',
              'w2',
              'w2_method',
              'work_redundancy',
              'final_avg_remaining',
              'wall_time', ]

FLOAT_FORMAT = '%.17g'

TRAJECTORY_FILE_TMPL = 'trajectory_agent{}.csv'
REGEX_TRAJECTORY_FILE = re.compile(r'^trajectory_agent(\d+)\.csv$')
MANIFEST_FILE = 'manifest.json'
TIMING_FILE = 'timing.json'
LEDGER_FILE = 'ledger.csv'
PLANS_FILE = 'plans.csv'
PROGRESS_FILE = 'progress.csv'
CLOUD_FILE = 'cloud.csv'
METRICS_FILE = 'metrics.json'

OUTPUT_KINDS = ('trajectories', 'ledger', 'plans', 'progress', 'cloud')


class TerminationMode:
    STEPS = 'steps'
    EXHAUSTED = 'exhausted'

    ALL = (STEPS, EXHAUSTED)


class TerminationReason:
    STEPS_COMPLETE = 'steps-complete'
    INSUFFICIENT_MASS = 'insufficient-mass'
    MASS_EXHAUSTED = 'mass-exhausted'
    MAX_STEPS = 'max-steps'
