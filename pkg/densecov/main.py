#!/usr/bin/env python
# -*- coding: utf-8 -*-

import argparse
import logging
import os
import sys
from typing import List, Optional

import attr
import pandas as pd
from rich.logging import RichHandler

from densecov import program_desc, __version__
from densecov.config import load_scenario
from densecov.const import BATCH_COLS, FLOAT_FORMAT, METRICS_FILE
from densecov.density import sample_points, write_cloud
from densecov.dynamics import build_model
from densecov.metrics import compute_metrics
from densecov.parsers import write_json
from densecov.runs import write_run, read_run
from densecov.scenario import Scenario
from densecov.sharing.const import SharingMethod
from densecov.sim import run_scenario, run_scenarios, uniform_alpha
import densecov.utils

SCRIPT_NAME = 'densecov'

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3


def init_console_logger(logging_verbosity=3):
    from rich.traceback import install

    install(show_locals=True, width=120, word_wrap=True)

    logging_levels = [logging.ERROR, logging.WARN, logging.INFO, logging.DEBUG]
    if logging_verbosity > (len(logging_levels) - 1):
        logging_verbosity = 3
    lvl = logging_levels[logging_verbosity]

    logging.basicConfig(format='%(message)s',
                        datefmt='[%Y-%m-%d %X]',
                        level=lvl,
                        handlers=[RichHandler(rich_tracebacks=True,
                                              tracebacks_show_locals=True)])


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('-v', '--verbose',
                        action='count',
                        default=0,
                        help='Logging verbosity level (-v == show warnings; -vvv == show debug info)')


def _add_config(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('-c', '--config',
                        required=True,
                        help='Scenario config (built-in: "integrator-coverage", "quadrotor-coverage", '
                             '"quadrotor-sharing", "energy-flexibility"; OR user-specified: /path/to/config.json)')
    parser.add_argument('--seed',
                        type=int,
                        help='Override the scenario seed')


def init_parser():
    parser = argparse.ArgumentParser(prog=SCRIPT_NAME,
                                     formatter_class=argparse.RawDescriptionHelpFormatter,
                                     description=program_desc)
    parser.add_argument('-V', '--version',
                        action='version',
                        version='%(prog)s {}'.format(__version__))
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')

    p = subparsers.add_parser('sample', help='Generate the reference sample-point cloud of a scenario')
    _add_config(p)
    p.add_argument('-o', '--out',
                   required=True,
                   help='Output sample-point cloud CSV path ("x,y,weight")')
    p.add_argument('--force',
                   action='store_true',
                   help='Force existing output files to be overwritten')
    _add_common(p)

    p = subparsers.add_parser('run', help='Run a scenario and write its run directory')
    _add_config(p)
    p.add_argument('-o', '--out',
                   help='Output run directory (default: output.dir of the config)')
    p.add_argument('-m', '--method',
                   choices=SharingMethod.ALL,
                   help='Override the weight-sharing method')
    p.add_argument('--force',
                   action='store_true',
                   help='Force existing output files to be overwritten')
    _add_common(p)

    p = subparsers.add_parser('metrics', help='Compute coverage metrics of a run directory')
    p.add_argument('run_dir',
                   help='Run directory written by "run"')
    p.add_argument('-r', '--reference',
                   help='Reference sample-point cloud CSV (default: the cloud saved in the run directory)')
    p.add_argument('-o', '--out',
                   help=f'Metrics JSON output path (default: RUN_DIR/{METRICS_FILE})')
    p.add_argument('-b', '--batch-csv',
                   help='Append a metrics row to this batch CSV')
    p.add_argument('--exact-limit',
                   type=int,
                   help='Largest atom count per side for the exact 2-Wasserstein solver (default 500)')
    p.add_argument('--force',
                   action='store_true',
                   help='Force existing output files to be overwritten')
    _add_common(p)

    p = subparsers.add_parser('validate', help='Validate a scenario config and print a summary')
    _add_config(p)
    _add_common(p)

    p = subparsers.add_parser('batch', help='Run the cross product of seeds, step counts, methods and ranges')
    _add_config(p)
    p.add_argument('-o', '--out',
                   required=True,
                   help='Batch metrics CSV output path')
    p.add_argument('--seeds',
                   type=int,
                   nargs='+',
                   help='Seeds to run (default: the config seed)')
    p.add_argument('--steps',
                   type=int,
                   nargs='+',
                   help='Terminal step counts applied to every agent (default: the config steps)')
    p.add_argument('--methods',
                   nargs='+',
                   choices=SharingMethod.ALL,
                   help='Weight-sharing methods (default: the config method)')
    p.add_argument('--r-comm',
                   type=float,
                   nargs='+',
                   help='Communication ranges in meters (default: the config range)')
    p.add_argument('--exact-limit',
                   type=int,
                   help='Largest atom count per side for the exact 2-Wasserstein solver')
    p.add_argument('-t', '--threads',
                   type=int,
                   default=1,
                   help='Number of parallel processes to run scenarios (default=1)')
    p.add_argument('--force',
                   action='store_true',
                   help='Force existing output files to be overwritten')
    _add_common(p)
    return parser


def cmd_sample(args) -> int:
    densecov.utils.does_file_exist(args.out, args.force)
    scenario = load_scenario(args.config, seed=args.seed)
    cloud = sample_points(scenario.density, scenario.n_samples, scenario.seed, scenario.domain)
    write_cloud(cloud, args.out)
    print(f'N={cloud.n} seed={scenario.seed}')
    return EXIT_OK


def cmd_run(args) -> int:
    scenario = load_scenario(args.config)
    scenario = densecov.utils.init_scenario_overrides(scenario, args)
    out_dir = scenario.output_dir
    if not out_dir:
        raise ValueError('No output directory given; use "--out" or "output.dir" in the config')
    result = run_scenario(scenario)
    write_run(result, scenario, out_dir, force=args.force)
    return EXIT_OK


def cmd_metrics(args) -> int:
    out = args.out or os.path.join(args.run_dir, METRICS_FILE)
    densecov.utils.does_file_exist(out, args.force)
    # the reference cloud, when given, replaces the run's own cloud
    result = read_run(args.run_dir, args.reference)
    kwargs = {'exact_limit': args.exact_limit} if args.exact_limit else {}
    report = compute_metrics(result, **kwargs)
    write_json(out, report.to_dict())
    logging.info('Wrote metrics to "%s"', out)
    if args.batch_csv:
        row = batch_row(report, r_comm=result.r_comm, terminal_steps=result.terminal_steps)
        append_batch_rows(args.batch_csv, [row])
    return EXIT_OK


def cmd_validate(args) -> int:
    scenario = load_scenario(args.config, seed=args.seed)
    alpha = uniform_alpha(scenario.agents) if scenario.total_steps > 0 else 0.0
    print(f'Scenario "{scenario.scenario_id}" is valid')
    print(f'  sample-points: N={scenario.n_samples} seed={scenario.seed} density={scenario.density.kind}')
    print(f'  domain: {scenario.domain.as_tuple()}  dt={scenario.dt}')
    print(f'  sharing: method={scenario.method} r_comm={scenario.r_comm}  termination={scenario.termination}')
    print(f'  agent-point weight alpha={alpha!r}')
    for i, agent in enumerate(scenario.agents):
        model = build_model(agent.kind)
        x0 = 'random' if agent.x0 is None else agent.x0.tolist()
        print(f'  agent {i}: {agent.kind.name} (n={model.n}, m={model.m}) steps={agent.steps} '
              f'horizon={agent.controller.horizon} x0={x0}')
    return EXIT_OK


def batch_row(report, r_comm: Optional[float], terminal_steps: Optional[int]) -> dict:
    return dict(scenario_id=report.scenario_id,
                seed=report.seed,
                method=report.method,
                r_comm=r_comm,
                terminal_steps=terminal_steps,
                w2=report.w2,
                w2_method=report.w2_method,
                work_redundancy=report.work_redundancy,
                final_avg_remaining=report.final_avg_remaining,
                wall_time=report.wall_time)


def append_batch_rows(path: str, rows: List[dict]) -> None:
    df = pd.DataFrame(rows, columns=BATCH_COLS)
    exists = os.path.exists(path)
    df.to_csv(path, mode='a' if exists else 'w', header=not exists, index=None, float_format=FLOAT_FORMAT)
    logging.info('Wrote %s batch rows to "%s"', len(rows), path)


def batch_scenarios(base: Scenario,
                    seeds: Optional[List[int]] = None,
                    steps: Optional[List[int]] = None,
                    methods: Optional[List[str]] = None,
                    r_comms: Optional[List[float]] = None) -> List[Scenario]:
    """Cross product of overrides applied to a base scenario, in seed, steps, method, range order."""
    scenarios = []
    for seed in seeds or [base.seed]:
        for n_steps in steps or [None]:
            for method in methods or [base.method]:
                for r_comm in r_comms or [base.r_comm]:
                    agents = base.agents if n_steps is None else [attr.evolve(a, steps=n_steps)
                                                                  for a in base.agents]
                    scenarios.append(attr.evolve(base, seed=seed, agents=agents, method=method, r_comm=r_comm))
    return scenarios


def cmd_batch(args) -> int:
    densecov.utils.does_file_exist(args.out, args.force)
    base = load_scenario(args.config, seed=args.seed)
    scenarios = batch_scenarios(base, args.seeds, args.steps, args.methods, args.r_comm)
    exact_limit = args.exact_limit or base.exact_limit
    logging.info('Batch of %s runs from scenario "%s"', len(scenarios), base.scenario_id)
    rows = []
    for _, result in run_scenarios(scenarios, n_threads=args.threads):
        report = compute_metrics(result, exact_limit=exact_limit)
        rows.append(batch_row(report, r_comm=result.r_comm, terminal_steps=result.terminal_steps))
    if os.path.exists(args.out):
        os.remove(args.out)
    append_batch_rows(args.out, rows)
    return EXIT_OK


COMMANDS = {
    'sample': cmd_sample,
    'run': cmd_run,
    'metrics': cmd_metrics,
    'validate': cmd_validate,
    'batch': cmd_batch,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = init_parser()
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) == 0:
        parser.print_help()
        parser.exit()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG_ERROR
    init_console_logger(args.verbose)
    logging.debug(args)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError, KeyError) as ex:
        logging.error('%s: %s', type(ex).__name__, ex)
        return EXIT_CONFIG_ERROR
    except ArithmeticError as ex:
        logging.error('%s: %s', type(ex).__name__, ex)
        return EXIT_NUMERICAL_ERROR


if __name__ == '__main__':
    sys.exit(main())
