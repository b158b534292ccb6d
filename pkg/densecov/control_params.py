# -*- coding: utf-8 -*-
from typing import Optional, Sequence

import attr
import numpy as np


def _as_matrix(x) -> np.ndarray:
    return np.atleast_2d(np.asarray(x, dtype=float))


@attr.s(eq=False)
class ControllerConfig(object):
    Q = attr.ib(converter=_as_matrix)
    R = attr.ib(converter=_as_matrix)
    horizon = attr.ib(default=15, validator=attr.validators.instance_of(int))
    u_max = attr.ib(default=None, validator=attr.validators.optional(attr.validators.instance_of((float, int))))

    @Q.validator
    def _validate_q(self, attribute, value):
        if value.shape[0] != value.shape[1]:
            raise ValueError(f'Q must be square, got shape {value.shape}')
        if not np.allclose(value, value.T, rtol=0.0, atol=1e-12):
            raise ValueError('Q must be symmetric')
        min_eig = np.linalg.eigvalsh(value).min()
        if min_eig < -1e-12:
            raise ValueError(f'Q must be positive semidefinite, smallest eigenvalue was {min_eig}')

    @R.validator
    def _validate_r(self, attribute, value):
        if value.shape[0] != value.shape[1]:
            raise ValueError(f'R must be square, got shape {value.shape}')
        if not np.allclose(value, value.T, rtol=0.0, atol=1e-12):
            raise ValueError('R must be symmetric')
        try:
            np.linalg.cholesky(value)
        except np.linalg.LinAlgError:
            raise ValueError(f'R must be positive definite, got {value.tolist()}')

    @horizon.validator
    def _validate_horizon(self, attribute, value):
        if value < 1:
            raise ValueError(f'Horizon length was {value}, expected at least 1')

    @u_max.validator
    def _validate_u_max(self, attribute, value):
        if value is not None and not value > 0:
            raise ValueError(f'Input threshold u_max was {value}, expected a positive value')

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @property
    def m(self) -> int:
        return self.R.shape[0]


def init_controller_config(q_diag: Sequence[float],
                           r_diag: Sequence[float],
                           horizon: int = 15,
                           u_max: Optional[float] = None) -> ControllerConfig:
    """Controller parameters from diagonal penalty vectors."""
    return ControllerConfig(Q=np.diag(np.asarray(q_diag, dtype=float)),
                            R=np.diag(np.asarray(r_diag, dtype=float)),
                            horizon=int(horizon),
                            u_max=None if u_max is None else float(u_max))
