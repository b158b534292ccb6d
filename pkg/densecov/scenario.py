# -*- coding: utf-8 -*-
from typing import Optional, List, Tuple

import attr
import numpy as np

from .const import TerminationMode, OUTPUT_KINDS, DEFAULT_EXACT_LIMIT
from .control_params import ControllerConfig
from .density import DensitySpec, DomainBounds
from .dynamics import ModelKind
from .sharing.const import SharingMethod


def _optional_vector(x) -> Optional[np.ndarray]:
    if x is None:
        return None
    return np.asarray(x, dtype=float).ravel()


@attr.s(eq=False)
class AgentSpec(object):
    kind = attr.ib(validator=attr.validators.instance_of(ModelKind))
    steps = attr.ib(validator=attr.validators.instance_of(int))
    controller = attr.ib(validator=attr.validators.instance_of(ControllerConfig))
    # None for a seeded uniform start; a full state or a 2-D output position otherwise
    x0 = attr.ib(default=None, converter=_optional_vector)

    @steps.validator
    def _validate_steps(self, attribute, value):
        if value < 0:
            raise ValueError(f'Agent steps M was {value}, expected a nonnegative count')


@attr.s(eq=False)
class Scenario(object):
    domain = attr.ib(validator=attr.validators.instance_of(DomainBounds))
    density = attr.ib(validator=attr.validators.instance_of(DensitySpec))
    n_samples = attr.ib(validator=attr.validators.instance_of(int))
    seed = attr.ib(validator=attr.validators.instance_of(int))
    agents: List[AgentSpec] = attr.ib()
    dt = attr.ib(default=0.1, converter=float)
    r_comm = attr.ib(default=0.0, converter=float)
    method = attr.ib(default=SharingMethod.PROPOSED, validator=attr.validators.in_(SharingMethod.ALL))
    termination = attr.ib(default=TerminationMode.STEPS, validator=attr.validators.in_(TerminationMode.ALL))
    max_steps = attr.ib(default=None, validator=attr.validators.optional(attr.validators.instance_of(int)))
    scenario_id = attr.ib(default='scenario', validator=attr.validators.instance_of(str))
    output_dir = attr.ib(default=None, validator=attr.validators.optional(attr.validators.instance_of(str)))
    output_what: Tuple[str, ...] = attr.ib(default=OUTPUT_KINDS, converter=tuple)
    exact_limit = attr.ib(default=DEFAULT_EXACT_LIMIT, validator=attr.validators.instance_of(int))
    config_hash = attr.ib(default=None, validator=attr.validators.optional(attr.validators.instance_of(str)))

    @agents.validator
    def _validate_agents(self, attribute, value):
        if len(value) < 1:
            raise ValueError('Scenario needs at least one agent')

    @n_samples.validator
    def _validate_n_samples(self, attribute, value):
        if value < 1:
            raise ValueError(f'Number of sample-points was {value}, expected at least 1')

    @dt.validator
    def _validate_dt(self, attribute, value):
        if not value > 0:
            raise ValueError(f'Time step dt was {value}, expected a positive value')

    @r_comm.validator
    def _validate_r_comm(self, attribute, value):
        if value < 0:
            raise ValueError(f'Communication range was {value}, expected a nonnegative value')

    @max_steps.validator
    def _validate_max_steps(self, attribute, value):
        if value is not None and value < 0:
            raise ValueError(f'max_steps was {value}, expected a nonnegative count')

    @output_what.validator
    def _validate_output_what(self, attribute, value):
        unknown = [x for x in value if x not in OUTPUT_KINDS]
        if unknown:
            raise ValueError(f'Unknown output kinds {unknown}; expected a subset of {list(OUTPUT_KINDS)}')

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def total_steps(self) -> int:
        return sum(a.steps for a in self.agents)

    def step_limit(self, agent: AgentSpec) -> int:
        """Steps an agent may take: its own M, or the exhausted-mode cap (default sum of M)."""
        if self.termination == TerminationMode.STEPS:
            return agent.steps
        return self.total_steps if self.max_steps is None else self.max_steps
