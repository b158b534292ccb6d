import math
from typing import Optional

import numpy as np

from densecov.control_params import ControllerConfig, init_controller_config
from densecov.controller import LocalSelection
from densecov.density import DomainBounds, gaussian_mixture
from densecov.dynamics import LtiModel, ModelKind, ModelName
from densecov.scenario import AgentSpec, Scenario

exp_trajectory_cols_integrator = ['agent', 'k', 't', 'x0', 'x1', 'px', 'py']
exp_plan_cols = ['agent', 'k', 'sample_index', 'gamma']
exp_ledger_cols = ['k', 'agent', 'remaining', 'true_remaining']


def make_selection(points, gamma) -> LocalSelection:
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    gamma = np.asarray(gamma, dtype=float)
    total = math.fsum(gamma)
    return LocalSelection(indices=np.arange(points.shape[0]),
                          gamma=gamma,
                          points=points,
                          gamma_sum=total,
                          centroid=(gamma @ points) / total)


def random_lti_instance(rng: np.random.Generator,
                        n: int,
                        m: int,
                        horizon: int,
                        singular: bool = False,
                        spectral_radius: Optional[float] = None):
    """Random LTI model with PSD Q, PD R, a random local selection and a random state.

    A is scaled to spectral radius at most 1, or exactly `spectral_radius` when given. With `singular` the first
    state is decoupled after scaling (A[:, 0] = 0, B[0, :] = 0). That changes the spectrum, so eigenvalues can end
    up well above 1: the singular case doubles as the unstable-A regime over long horizons.
    """
    A = rng.normal(size=(n, n))
    rho = max(abs(np.linalg.eigvals(A)))
    A = A / max(rho, 1.0) if spectral_radius is None else A * (spectral_radius / rho)
    B = rng.normal(size=(n, m))
    if singular:
        A[:, 0] = 0.0
        B[0, :] = 0.0
    C = np.zeros((2, n))
    C[0, 0] = 1.0
    C[1, 1] = 1.0
    L = rng.normal(size=(n, max(1, n // 2)))
    Q = 0.1 * L @ L.T
    M = rng.normal(size=(m, m))
    R = M @ M.T + 0.5 * np.eye(m)
    config = ControllerConfig(Q=Q, R=R, horizon=horizon)
    n_points = int(rng.integers(1, 6))
    selection = make_selection(rng.uniform(-5, 5, size=(n_points, 2)), rng.uniform(0.05, 1.0, size=n_points))
    x = rng.normal(size=n)
    return LtiModel(A=A, B=B, C=C), config, selection, x


def small_scenario(steps=(10, 10),
                   x0s=None,
                   method='proposed',
                   r_comm=0.0,
                   n_samples=40,
                   seed=7,
                   termination='steps',
                   max_steps=None,
                   r_diag=1e-6,
                   u_max=None,
                   horizon=3,
                   scenario_id='small') -> Scenario:
    """Integrator fleet over a 10 m x 10 m two-mode mixture."""
    domain = DomainBounds(0.0, 10.0, 0.0, 10.0)
    density = gaussian_mixture(means=[[3.0, 3.0], [7.0, 6.0]],
                               covariances=[np.eye(2), 2.0 * np.eye(2)],
                               mix_weights=[0.5, 0.5],
                               bounds=domain)
    x0s = x0s or [None] * len(steps)
    agents = [AgentSpec(kind=ModelKind(name=ModelName.SINGLE_INTEGRATOR, dt=0.1),
                        steps=m,
                        controller=init_controller_config([0.0, 0.0], [r_diag, r_diag], horizon, u_max),
                        x0=x0)
              for m, x0 in zip(steps, x0s)]
    return Scenario(domain=domain,
                    density=density,
                    n_samples=n_samples,
                    seed=seed,
                    agents=agents,
                    dt=0.1,
                    r_comm=r_comm,
                    method=method,
                    termination=termination,
                    max_steps=max_steps,
                    scenario_id=scenario_id)


def check_plans_sum_to_alpha(plans, alpha, tol=1e-12):
    sums = plans.groupby(['agent', 'k'])['gamma'].apply(lambda g: math.fsum(g.values))
    assert np.all(np.abs(sums.values - alpha) <= tol), f'Per-step transported mass differs from alpha={alpha!r}'


def quadrotor_fleet(r_comm: float,
                    method: str = 'proposed',
                    seed: int = 0,
                    n_agents: int = 6,
                    steps: int = 20,
                    n_samples: int = 100) -> Scenario:
    """Planar quadrotors started at random over a 6 m x 6 m two-mode mixture."""
    domain = DomainBounds(0.0, 6.0, 0.0, 6.0)
    density = gaussian_mixture(means=[[2.0, 2.0], [4.0, 4.0]],
                               covariances=[0.5 * np.eye(2), 0.8 * np.eye(2)],
                               mix_weights=[0.5, 0.5],
                               bounds=domain)
    controller = init_controller_config([0.0, 1e-5, 1e-5, 1e-5, 0.0, 1e-5, 1e-5, 1e-5], [1e-2, 1e-2], 5)
    agents = [AgentSpec(kind=ModelKind(name=ModelName.PLANAR_QUADROTOR, dt=0.1),
                        steps=steps,
                        controller=controller,
                        x0=None)
              for _ in range(n_agents)]
    return Scenario(domain=domain,
                    density=density,
                    n_samples=n_samples,
                    seed=seed,
                    agents=agents,
                    dt=0.1,
                    r_comm=r_comm,
                    method=method,
                    termination='steps',
                    max_steps=None,
                    scenario_id='quadrotor-fleet')
