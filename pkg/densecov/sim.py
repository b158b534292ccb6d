# -*- coding: utf-8 -*-
"""
Multi-agent coverage simulation.

Every tick each active agent, in ascending index order, picks its local sample-points, applies the optimal
input, moves, and transports weight from the sample-points nearest its new position. After all agents have
moved, in-range agents share their ledgers until nothing changes.
"""
import logging
import math
import time
from typing import List, Optional, Tuple

import attr
import numpy as np
import pandas as pd

from .const import TerminationMode, TerminationReason, EXHAUSTED_MASS, PLAN_COLS, LEDGER_COLS
from .controller import select_local_samples, optimal_control, LtiGainCache
from .density import SamplePointCloud, sample_points
from .dynamics import build_model, output, step, state_from_position, Model, NonlinearModel
from .exceptions import ContractViolation, DomainError, InsufficientMassError
from .scenario import AgentSpec, Scenario
from .sharing import SharingMethod, CoverageLedger, new_ledger, record_own_progress, merge, ledgers_agree, \
    centralized_remaining, remaining_from_progress, ledger_snapshot
from .transport import TransportPlan, weight_update_plan


@attr.s(eq=False)
class AgentRuntime(object):
    index = attr.ib(validator=attr.validators.instance_of(int))
    spec: AgentSpec = attr.ib()
    model: Model = attr.ib()
    state = attr.ib()
    ledger: CoverageLedger = attr.ib()
    limit = attr.ib(validator=attr.validators.instance_of(int))
    cache = attr.ib(factory=LtiGainCache)
    steps_taken = attr.ib(default=0)
    finished = attr.ib(default=False)
    finish_reason = attr.ib(default=None)
    states = attr.ib(factory=list)

    @property
    def position(self) -> np.ndarray:
        return output(self.model, self.state)

    def finish(self, reason: str) -> None:
        self.finished = True
        self.finish_reason = reason
        logging.debug('Agent %s finished after %s steps: %s', self.index, self.steps_taken, reason)


@attr.s(eq=False)
class SimResult(object):
    scenario_id = attr.ib()
    seed = attr.ib()
    method = attr.ib()
    alpha = attr.ib()
    dt = attr.ib()
    termination_reason = attr.ib()
    trajectories: pd.DataFrame = attr.ib(repr=False)
    plans: pd.DataFrame = attr.ib(repr=False)
    ledger: pd.DataFrame = attr.ib(repr=False)
    progress: np.ndarray = attr.ib(repr=False)
    cloud: SamplePointCloud = attr.ib(repr=False)
    agent_reasons: List[str] = attr.ib(factory=list)
    exchanges = attr.ib(default=0)
    wall_time = attr.ib(default=0.0)
    snapshot: Optional[pd.DataFrame] = attr.ib(default=None, repr=False)
    r_comm = attr.ib(default=None)
    agent_steps: List[int] = attr.ib(factory=list)

    @property
    def n_agents(self) -> int:
        return self.progress.shape[0]

    @property
    def terminal_steps(self) -> Optional[int]:
        return max(self.agent_steps) if self.agent_steps else None

    def agent_trajectory(self, agent: int) -> pd.DataFrame:
        df = self.trajectories[self.trajectories.agent == agent]
        return df.dropna(axis=1, how='all').reset_index(drop=True)


def uniform_alpha(agents: List[AgentSpec]) -> float:
    """Agent-point weight 1 / sum of all agents' steps, shared by every step of every agent."""
    total = sum(a.steps for a in agents)
    if total < 1:
        raise ContractViolation('Uniform agent-point weight needs at least one agent step')
    return 1.0 / total


def initial_states(scenario: Scenario, rng: np.random.Generator) -> List[np.ndarray]:
    """Initial state per agent: the configured state or position, else a uniform draw over the domain."""
    states = []
    for i, agent in enumerate(scenario.agents):
        model = build_model(agent.kind)
        if agent.x0 is None:
            d = scenario.domain
            pos = np.array([rng.uniform(d.xmin, d.xmax), rng.uniform(d.ymin, d.ymax)])
            x0 = state_from_position(model, pos)
        elif agent.x0.shape[0] == model.n:
            x0 = agent.x0.copy()
        elif agent.x0.shape[0] == model.p:
            x0 = state_from_position(model, agent.x0)
        else:
            raise ContractViolation(f'Agent {i} initial value has {agent.x0.shape[0]} entries; '
                                    f'expected {model.n} (state) or {model.p} (position)')
        if not scenario.domain.contains(output(model, x0))[0]:
            raise DomainError(f'Agent {i} starts outside the domain {scenario.domain.as_tuple()}')
        states.append(x0)
    return states


def initial_positions_rng(seed: int) -> np.random.Generator:
    # independent of the sample-point stream drawn from the same seed
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(2)[1])


def agent_step(runtime: AgentRuntime,
               ledger: CoverageLedger,
               cloud: SamplePointCloud,
               alpha: float) -> Tuple[np.ndarray, TransportPlan]:
    """Move one agent and transport its agent-point weight.

    The local selection and control use the ledger before the move; the weight-update plan is computed at the
    new position and recorded in the ledger.

    Raises:
        InsufficientMassError: if the ledger cannot supply `alpha`
    """
    selection = select_local_samples(runtime.position, ledger.beta, cloud.positions, alpha)
    u = optimal_control(runtime.model, runtime.spec.controller, selection, runtime.state, runtime.cache)
    x_next = step(runtime.model, runtime.state, u)
    plan = weight_update_plan(output(runtime.model, x_next), ledger.beta, cloud.positions, alpha)
    record_own_progress(ledger, plan, agent=runtime.index)
    return x_next, plan


def sharing_pass(runtimes: List[AgentRuntime], method: str, r_comm: float) -> int:
    """Merge in-range ledgers pairwise in ascending (r, s) order until a full pass changes nothing.

    Pairs whose ledgers already agree are skipped. Under centralized bookkeeping the shared ledger is
    rebuilt from the fleet's progress instead.

    Returns:
        number of merges performed
    """
    if method == SharingMethod.CENTRALIZED:
        ledger = runtimes[0].ledger
        ledger.beta = centralized_remaining(ledger.progress, ledger.beta0)
        return 0
    positions = np.array([rt.position for rt in runtimes])
    compare_progress = method == SharingMethod.PROPOSED
    in_range = [(r, s)
                for r in range(len(runtimes))
                for s in range(r + 1, len(runtimes))
                if np.linalg.norm(positions[r] - positions[s]) <= r_comm]
    exchanges = 0
    changed = True
    while changed:
        changed = False
        for r, s in in_range:
            ledger_r, ledger_s = runtimes[r].ledger, runtimes[s].ledger
            if ledgers_agree(ledger_r, ledger_s, compare_progress):
                continue
            merge(method, ledger_r, ledger_s)
            exchanges += 1
            changed = True
    return exchanges


def _init_runtimes(scenario: Scenario, cloud: SamplePointCloud) -> List[AgentRuntime]:
    rng = initial_positions_rng(scenario.seed)
    x0s = initial_states(scenario, rng)
    n_agents = scenario.n_agents
    shared = new_ledger(0, cloud.weights, n_agents) if scenario.method == SharingMethod.CENTRALIZED else None
    runtimes = []
    for i, (agent, x0) in enumerate(zip(scenario.agents, x0s)):
        model = build_model(agent.kind)
        if isinstance(model, NonlinearModel) and agent.controller.horizon > 1:
            logging.warning('Agent %s uses control-affine model "%s"; horizon %s is treated as 1',
                            i, model.name, agent.controller.horizon)
        rt = AgentRuntime(index=i,
                          spec=agent,
                          model=model,
                          state=x0,
                          ledger=shared if shared is not None else new_ledger(i, cloud.weights, n_agents),
                          limit=scenario.step_limit(agent))
        rt.states.append(x0)
        runtimes.append(rt)
    return runtimes


def _ledger_rows(k: int, runtimes: List[AgentRuntime], true_remaining: float) -> List[Tuple]:
    return [(k, rt.index, math.fsum(rt.ledger.beta), true_remaining) for rt in runtimes]


def _trajectory_frame(runtimes: List[AgentRuntime], dt: float) -> pd.DataFrame:
    frames = []
    for rt in runtimes:
        states = np.vstack(rt.states)
        ks = np.arange(states.shape[0])
        df = pd.DataFrame({'agent': rt.index, 'k': ks, 't': ks * dt})
        for i in range(states.shape[1]):
            df[f'x{i}'] = states[:, i]
        outputs = states @ rt.model.C.T
        df['px'] = outputs[:, 0]
        df['py'] = outputs[:, 1]
        frames.append(df)
    df = pd.concat(frames, ignore_index=True, sort=False)
    state_cols = sorted([c for c in df.columns if c.startswith('x')], key=lambda c: int(c[1:]))
    return df[['agent', 'k', 't'] + state_cols + ['px', 'py']]


def _termination_reason(runtimes: List[AgentRuntime], true_remaining: float) -> str:
    if true_remaining < EXHAUSTED_MASS:
        return TerminationReason.MASS_EXHAUSTED
    reasons = {rt.finish_reason for rt in runtimes}
    if TerminationReason.INSUFFICIENT_MASS in reasons:
        return TerminationReason.INSUFFICIENT_MASS
    if TerminationReason.MAX_STEPS in reasons:
        return TerminationReason.MAX_STEPS
    return TerminationReason.STEPS_COMPLETE


def run_scenario(scenario: Scenario, cloud: Optional[SamplePointCloud] = None) -> SimResult:
    """Run a scenario to completion.

    The run ends when every agent has finished (step limit reached or its ledger cannot supply the
    agent-point weight) or when the fleet's true remaining weight drops below 1e-9. Results are fully
    determined by the scenario and its seed.

    Args:
        scenario: validated scenario
        cloud: reference sample-point cloud; drawn from the scenario density and seed when not given

    Returns:
        SimResult with trajectories, transport plans and ledger time series
    """
    if cloud is None:
        cloud = sample_points(scenario.density, scenario.n_samples, scenario.seed, scenario.domain)
    runtimes = _init_runtimes(scenario, cloud)
    n_agents = scenario.n_agents
    alpha = uniform_alpha(scenario.agents) if scenario.total_steps > 0 else 0.0
    true_progress = np.zeros((n_agents, cloud.n))
    finished_reason = TerminationReason.MAX_STEPS if scenario.termination == TerminationMode.EXHAUSTED \
        else TerminationReason.STEPS_COMPLETE
    for rt in runtimes:
        if rt.limit == 0:
            rt.finish(finished_reason)
    logging.info('Running scenario "%s" (seed=%s, method=%s, %s agents, alpha=%r, termination=%s)',
                 scenario.scenario_id, scenario.seed, scenario.method, n_agents, alpha, scenario.termination)

    plan_rows: List[Tuple[int, int, int, float]] = []
    ledger_rows = _ledger_rows(0, runtimes, math.fsum(cloud.weights))
    true_remaining = math.fsum(cloud.weights)
    exchanges = 0
    k = 0
    start = time.perf_counter()
    while not all(rt.finished for rt in runtimes):
        for rt in runtimes:
            if rt.finished:
                continue
            try:
                x_next, plan = agent_step(rt, rt.ledger, cloud, alpha)
            except InsufficientMassError:
                rt.finish(TerminationReason.INSUFFICIENT_MASS)
                continue
            rt.state = x_next
            rt.states.append(x_next)
            rt.steps_taken += 1
            np.add.at(true_progress[rt.index], plan.indices, plan.amounts)
            plan_rows += [(rt.index, k + 1, int(j), float(g)) for j, g in zip(plan.indices, plan.amounts)]
            if rt.steps_taken >= rt.limit:
                rt.finish(finished_reason)
        exchanges += sharing_pass(runtimes, scenario.method, scenario.r_comm)
        k += 1
        true_remaining = math.fsum(remaining_from_progress(true_progress, cloud.weights))
        ledger_rows += _ledger_rows(k, runtimes, true_remaining)
        if true_remaining < EXHAUSTED_MASS:
            for rt in runtimes:
                if not rt.finished:
                    rt.finish(TerminationReason.MASS_EXHAUSTED)
            break
    wall_time = time.perf_counter() - start
    reason = _termination_reason(runtimes, true_remaining)
    logging.info('Scenario "%s" finished after %s ticks (%s, %s ledger exchanges, %.3f s)',
                 scenario.scenario_id, k, reason, exchanges, wall_time)
    ledgers = [runtimes[0].ledger] if scenario.method == SharingMethod.CENTRALIZED else [rt.ledger for rt in runtimes]
    return SimResult(scenario_id=scenario.scenario_id,
                     seed=scenario.seed,
                     method=scenario.method,
                     alpha=alpha,
                     dt=scenario.dt,
                     termination_reason=reason,
                     trajectories=_trajectory_frame(runtimes, scenario.dt),
                     plans=pd.DataFrame(plan_rows, columns=PLAN_COLS),
                     ledger=pd.DataFrame(ledger_rows, columns=LEDGER_COLS),
                     progress=true_progress,
                     cloud=cloud,
                     agent_reasons=[rt.finish_reason for rt in runtimes],
                     exchanges=exchanges,
                     wall_time=wall_time,
                     snapshot=ledger_snapshot(ledgers),
                     r_comm=scenario.r_comm,
                     agent_steps=[a.steps for a in scenario.agents])


def run_scenarios(scenarios: List[Scenario], n_threads: int = 1) -> List[Tuple[Scenario, SimResult]]:
    """Run independent scenarios serially or in a multiprocessing pool; each result is the same either way."""
    if n_threads == 1:
        logging.info('Serial single threaded run mode on %s scenarios', len(scenarios))
        return [(s, run_scenario(s)) for s in scenarios]
    from multiprocessing import Pool
    logging.info('Initializing process pool with %s processes', n_threads)
    with Pool(processes=n_threads) as pool:
        logging.info('Running %s scenarios asynchronously', len(scenarios))
        res = [pool.apply_async(run_scenario, (s,)) for s in scenarios]
        results = [x.get() for x in res]
    logging.info('Parallel runs complete! Retrieved %s results', len(results))
    return list(zip(scenarios, results))
