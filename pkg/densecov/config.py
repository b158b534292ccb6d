# -*- coding: utf-8 -*-
"""
Scenario configs: JSON documents turned into validated `Scenario` objects.

Every problem is reported as a `ConfigError` carrying the JSON pointer of the offending field.
"""
import hashlib
import json
import logging
import os
from typing import Any, Dict, List, Optional

import numpy as np

from .const import TerminationMode, OUTPUT_KINDS, DEFAULT_EXACT_LIMIT
from .control_params import init_controller_config, ControllerConfig
from .density import DomainBounds, DensitySpec, DensityKind, gaussian_mixture, grid_density, load_density_grid
from .dynamics import ModelKind, ModelName, build_model, output
from .exceptions import ConfigError
from .scenario import AgentSpec, Scenario
from .sharing.const import SharingMethod
from .utils import get_scenario_path

MODEL_PARAMS = ('g_grav', 'ixx', 'iyy')


def _is_number(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and np.isfinite(x)


def _is_int(x: Any) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _section(doc: Dict[str, Any], key: str, pointer: str, required: bool = True) -> Optional[Dict[str, Any]]:
    if key not in doc:
        if required:
            raise ConfigError(f'missing required section "{key}"', pointer)
        return None
    value = doc[key]
    if not isinstance(value, dict):
        raise ConfigError(f'expected an object, got {type(value).__name__}', f'{pointer}/{key}')
    return value


def _number(doc: Dict[str, Any], key: str, pointer: str, default: Any = ..., minimum: Optional[float] = None,
            exclusive: bool = False) -> Optional[float]:
    ptr = f'{pointer}/{key}'
    if key not in doc or doc[key] is None:
        if default is ...:
            raise ConfigError('missing required number', ptr)
        return default
    value = doc[key]
    if not _is_number(value):
        raise ConfigError(f'expected a finite number, got {value!r}', ptr)
    if minimum is not None:
        if exclusive and not value > minimum:
            raise ConfigError(f'expected a value greater than {minimum}, got {value}', ptr)
        if not exclusive and value < minimum:
            raise ConfigError(f'expected a value of at least {minimum}, got {value}', ptr)
    return float(value)


def _integer(doc: Dict[str, Any], key: str, pointer: str, default: Any = ..., minimum: Optional[int] = None) \
        -> Optional[int]:
    ptr = f'{pointer}/{key}'
    if key not in doc or doc[key] is None:
        if default is ...:
            raise ConfigError('missing required integer', ptr)
        return default
    value = doc[key]
    if not _is_int(value):
        raise ConfigError(f'expected an integer, got {value!r}', ptr)
    if minimum is not None and value < minimum:
        raise ConfigError(f'expected an integer of at least {minimum}, got {value}', ptr)
    return value


def _number_list(value: Any, ptr: str, length: Optional[int] = None) -> List[float]:
    if not isinstance(value, list) or not all(_is_number(v) for v in value):
        raise ConfigError(f'expected a list of numbers, got {value!r}', ptr)
    if length is not None and len(value) != length:
        raise ConfigError(f'expected {length} numbers, got {len(value)}', ptr)
    return [float(v) for v in value]


def _choice(doc: Dict[str, Any], key: str, pointer: str, choices, default: Any = ...) -> str:
    ptr = f'{pointer}/{key}'
    if key not in doc:
        if default is ...:
            raise ConfigError(f'missing required value (one of {list(choices)})', ptr)
        return default
    value = doc[key]
    if value not in choices:
        raise ConfigError(f'expected one of {list(choices)}, got {value!r}', ptr)
    return value


def parse_domain(doc: Dict[str, Any]) -> DomainBounds:
    section = _section(doc, 'domain', '')
    vals = [_number(section, k, '/domain') for k in ('xmin', 'xmax', 'ymin', 'ymax')]
    try:
        return DomainBounds(*vals)
    except ValueError as ex:
        raise ConfigError(str(ex), '/domain')


def _resolve_path(path: str, base_dir: Optional[str]) -> str:
    if os.path.isabs(path) or base_dir is None or os.path.exists(path):
        return path
    return os.path.join(base_dir, path)


def parse_density(doc: Dict[str, Any], domain: DomainBounds, base_dir: Optional[str]) -> DensitySpec:
    section = _section(doc, 'density', '')
    kind = _choice(section, 'kind', '/density', (DensityKind.MIXTURE, DensityKind.GRID))
    if kind == DensityKind.MIXTURE:
        comps = section.get('components')
        if not isinstance(comps, list) or len(comps) == 0:
            raise ConfigError('expected a non-empty list of mixture components', '/density/components')
        means, covs, weights = [], [], []
        for i, comp in enumerate(comps):
            ptr = f'/density/components/{i}'
            if not isinstance(comp, dict):
                raise ConfigError('expected an object', ptr)
            means.append(_number_list(comp.get('mean'), f'{ptr}/mean', 2))
            cov = comp.get('cov')
            if not isinstance(cov, list) or len(cov) != 2:
                raise ConfigError('expected a 2x2 matrix', f'{ptr}/cov')
            covs.append([_number_list(row, f'{ptr}/cov/{r}', 2) for r, row in enumerate(cov)])
            weights.append(_number(comp, 'weight', ptr, default=1.0 / len(comps), minimum=0.0, exclusive=True))
        try:
            return gaussian_mixture(means, covs, weights, domain)
        except ValueError as ex:
            raise ConfigError(str(ex), '/density/components')
    if 'path' in section:
        path = section['path']
        if not isinstance(path, str):
            raise ConfigError(f'expected a file path, got {path!r}', '/density/path')
        path = _resolve_path(path, base_dir)
        if not os.path.exists(path):
            raise ConfigError(f'grid file "{path}" does not exist', '/density/path')
        try:
            spec = load_density_grid(path)
        except ValueError as ex:
            raise ConfigError(f'grid file "{path}": {ex}', '/density/path')
    elif 'values' in section:
        values = section['values']
        if not isinstance(values, list) or len(values) == 0:
            raise ConfigError('expected a non-empty list of rows', '/density/values')
        rows = [_number_list(row, f'/density/values/{r}', len(values[0]) if isinstance(values[0], list) else None)
                for r, row in enumerate(values)]
        try:
            spec = grid_density(rows, domain)
        except ValueError as ex:
            raise ConfigError(str(ex), '/density/values')
    else:
        raise ConfigError('grid density needs "path" or "values"', '/density')
    if not domain.is_within(spec.bounds):
        raise ConfigError(f'domain {domain.as_tuple()} extends beyond the grid bounds {spec.bounds.as_tuple()}',
                          '/domain')
    return spec


def _penalties(section: Optional[Dict[str, Any]], ptr: str, n: int, m: int, horizon: int,
               u_max: Optional[float]) -> ControllerConfig:
    q_diag = _number_list(section.get('Q_diag'), f'{ptr}/Q_diag', n)
    r_diag = _number_list(section.get('R_diag'), f'{ptr}/R_diag', m)
    if any(q < 0 for q in q_diag):
        raise ConfigError('Q_diag entries must be nonnegative', f'{ptr}/Q_diag')
    if any(r <= 0 for r in r_diag):
        raise ConfigError('R_diag entries must be positive', f'{ptr}/R_diag')
    return init_controller_config(q_diag, r_diag, horizon, u_max)


def parse_agents(doc: Dict[str, Any], domain: DomainBounds, dt: float, horizon: int,
                 u_max: Optional[float]) -> List[AgentSpec]:
    agents_doc = doc.get('agents')
    if not isinstance(agents_doc, list) or len(agents_doc) == 0:
        raise ConfigError('expected a non-empty list of agents', '/agents')
    default_penalties = _section(doc, 'penalties', '', required=False)
    agents = []
    for i, entry in enumerate(agents_doc):
        ptr = f'/agents/{i}'
        if not isinstance(entry, dict):
            raise ConfigError('expected an object', ptr)
        name = _choice(entry, 'model', ptr, ModelName.ALL)
        params = entry.get('params', {}) or {}
        if not isinstance(params, dict):
            raise ConfigError('expected an object', f'{ptr}/params')
        unknown = [k for k in params if k not in MODEL_PARAMS]
        if unknown:
            raise ConfigError(f'unknown model parameters {unknown}', f'{ptr}/params')
        kwargs = {k: _number(params, k, f'{ptr}/params', minimum=0.0, exclusive=k != 'g_grav')
                  for k in MODEL_PARAMS if k in params}
        kind = ModelKind(name=name, dt=dt, **kwargs)
        model = build_model(kind)
        steps = _integer(entry, 'steps', ptr, minimum=0)
        count = _integer(entry, 'count', ptr, default=1, minimum=1)
        if 'penalties' in entry:
            controller = _penalties(_section(entry, 'penalties', ptr), f'{ptr}/penalties', model.n, model.m,
                                    horizon, u_max)
        elif default_penalties is not None:
            controller = _penalties(default_penalties, '/penalties', model.n, model.m, horizon, u_max)
        else:
            raise ConfigError('no penalties given for this agent and no top-level "penalties" section', ptr)
        x0 = entry.get('x0', 'random')
        if x0 == 'random':
            x0 = None
        else:
            if not isinstance(x0, list) or len(x0) not in (model.n, model.p):
                raise ConfigError(f'expected "random", a {model.n}-element state or a 2-D position, got {x0!r}',
                                  f'{ptr}/x0')
            x0 = _number_list(x0, f'{ptr}/x0')
            pos = np.asarray(x0) if len(x0) == model.p and model.n != model.p else output(model, x0)
            if not domain.contains(pos)[0]:
                raise ConfigError(f'initial position ({pos[0]}, {pos[1]}) lies outside the domain '
                                  f'{domain.as_tuple()}', f'{ptr}/x0')
        agents += [AgentSpec(kind=kind, steps=steps, controller=controller, x0=x0) for _ in range(count)]
    return agents


def scenario_from_dict(doc: Dict[str, Any],
                       base_dir: Optional[str] = None,
                       default_id: str = 'scenario') -> Scenario:
    if not isinstance(doc, dict):
        raise ConfigError('config must be a JSON object', '')
    domain = parse_domain(doc)
    density = parse_density(doc, domain, base_dir)
    sampling = _section(doc, 'sampling', '')
    n_samples = _integer(sampling, 'N', '/sampling', minimum=1)
    seed = _integer(sampling, 'seed', '/sampling', default=0, minimum=0)
    dt = _number(doc, 'dt', '', default=0.1, minimum=0.0, exclusive=True)
    horizon = _integer(doc, 'horizon', '', default=15, minimum=1)
    u_max = _number(doc, 'u_max', '', default=None, minimum=0.0, exclusive=True)
    agents = parse_agents(doc, domain, dt, horizon, u_max)
    comm = _section(doc, 'comm', '', required=False) or {}
    r_comm = _number(comm, 'r_comm', '/comm', default=0.0, minimum=0.0)
    method = _choice(comm, 'method', '/comm', SharingMethod.ALL, default=SharingMethod.PROPOSED)
    term = _section(doc, 'termination', '', required=False) or {}
    mode = _choice(term, 'mode', '/termination', TerminationMode.ALL, default=TerminationMode.STEPS)
    max_steps = _integer(term, 'max_steps', '/termination', default=None, minimum=0)
    out = _section(doc, 'output', '', required=False) or {}
    out_dir = out.get('dir')
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigError(f'expected a directory path, got {out_dir!r}', '/output/dir')
    what = out.get('what', list(OUTPUT_KINDS))
    if not isinstance(what, list) or any(w not in OUTPUT_KINDS for w in what):
        raise ConfigError(f'expected a subset of {list(OUTPUT_KINDS)}, got {what!r}', '/output/what')
    exact_limit = _integer(doc, 'exact_limit', '', default=DEFAULT_EXACT_LIMIT, minimum=1)
    scenario_id = doc.get('id', default_id)
    if not isinstance(scenario_id, str):
        raise ConfigError(f'expected a string, got {scenario_id!r}', '/id')
    return Scenario(domain=domain,
                    density=density,
                    n_samples=n_samples,
                    seed=seed,
                    agents=agents,
                    dt=dt,
                    r_comm=r_comm,
                    method=method,
                    termination=mode,
                    max_steps=max_steps,
                    scenario_id=scenario_id,
                    output_dir=out_dir,
                    output_what=what,
                    exact_limit=exact_limit)


def config_digest(path: str) -> str:
    with open(path, 'rb') as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def read_config(path: str) -> Dict[str, Any]:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as ex:
        raise ConfigError(f'invalid JSON in "{path}": {ex.msg} (line {ex.lineno}, column {ex.colno})', '')


def load_scenario(path_or_name: str, seed: Optional[int] = None, method: Optional[str] = None) -> Scenario:
    """Load a scenario config file or built-in scenario by name, applying seed and sharing method overrides.

    Raises:
        ConfigError: on any structural or cross-field problem
    """
    path = get_scenario_path(path_or_name)
    doc = read_config(path)
    default_id = os.path.splitext(os.path.basename(path))[0]
    scenario = scenario_from_dict(doc, base_dir=os.path.dirname(os.path.abspath(path)), default_id=default_id)
    scenario.config_hash = config_digest(path)
    if seed is not None:
        scenario.seed = int(seed)
    if method is not None:
        if method not in SharingMethod.ALL:
            raise ConfigError(f'expected one of {list(SharingMethod.ALL)}, got {method!r}', '/comm/method')
        scenario.method = method
    logging.info('Loaded scenario "%s" from "%s": %s agents, N=%s, method=%s',
                 scenario.scenario_id, path, scenario.n_agents, scenario.n_samples, scenario.method)
    return scenario
