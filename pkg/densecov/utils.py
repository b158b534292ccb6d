# -*- coding: utf-8 -*-

import argparse
import logging
import os
from typing import Optional, List

from .const import BUILTIN_SCENARIOS


def does_file_exist(filepath: str, force: bool):
    if filepath and os.path.exists(filepath):
        if not force:
            msg = f'File "{filepath}" already exists! If you want to overwrite this output file run with opt "--force"'
            raise FileExistsError(msg)
        else:
            logging.warning(f'File "{filepath}" already exists, overwriting with "--force"')


def check_output_files(out_dir: str, filenames: List[str], force: bool) -> None:
    """Refuse to write into `out_dir` if any of `filenames` is already there, unless forced."""
    for filename in filenames:
        does_file_exist(os.path.join(out_dir, filename), force)


def get_scenario_path(scenario: str) -> str:
    if scenario in BUILTIN_SCENARIOS:
        return BUILTIN_SCENARIOS[scenario]['file']
    elif os.path.exists(scenario) and os.path.isfile(scenario):
        return scenario
    raise FileNotFoundError(f'Could not find built-in or user-specified scenario config "{scenario}"')


def init_scenario_overrides(scenario, args: Optional[argparse.Namespace] = None):
    """Apply command-line overrides to a loaded scenario

    Args:
        scenario: Scenario loaded from a config file
        args: ArgumentParser.parse_args() output

    Returns:
        Scenario with user-supplied values then config values loaded
    """
    if args:
        if getattr(args, 'seed', None) is not None:
            scenario.seed = args.seed
        if getattr(args, 'method', None):
            scenario.method = args.method
        if getattr(args, 'out', None):
            scenario.output_dir = args.out
        if getattr(args, 'exact_limit', None):
            scenario.exact_limit = args.exact_limit
    return scenario
