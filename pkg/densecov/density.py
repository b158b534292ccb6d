# -*- coding: utf-8 -*-
"""
Reference density maps and the weighted sample-point clouds drawn from them.
"""
import logging
import math
from typing import Optional, Tuple

import attr
import numpy as np
from scipy.stats import multivariate_normal

from .const import MASS_TOL, MIN_ACCEPTANCE_RATE, MIN_PROPOSALS_FOR_DEGENERACY
from .exceptions import DomainError, DegenerateDensityError
from .parsers import parse_grid_file, write_grid_file, read_xyw_table, write_xyw_table


class DensityKind:
    MIXTURE = 'gaussian-mixture'
    GRID = 'grid'


@attr.s(frozen=True)
class DomainBounds(object):
    xmin = attr.ib(converter=float)
    xmax = attr.ib(converter=float)
    ymin = attr.ib(converter=float)
    ymax = attr.ib(converter=float)

    @xmax.validator
    def _validate_xmax(self, attribute, value):
        if not value > self.xmin:
            raise ValueError(f'Domain xmax ({value}) must be greater than xmin ({self.xmin})')

    @ymax.validator
    def _validate_ymax(self, attribute, value):
        if not value > self.ymin:
            raise ValueError(f'Domain ymax ({value}) must be greater than ymin ({self.ymin})')

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return self.xmin, self.xmax, self.ymin, self.ymax

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        return (pts[:, 0] >= self.xmin) & (pts[:, 0] <= self.xmax) & \
               (pts[:, 1] >= self.ymin) & (pts[:, 1] <= self.ymax)

    def is_within(self, other: 'DomainBounds') -> bool:
        return self.xmin >= other.xmin and self.xmax <= other.xmax \
            and self.ymin >= other.ymin and self.ymax <= other.ymax


@attr.s(eq=False)
class DensitySpec(object):
    kind = attr.ib(validator=attr.validators.in_([DensityKind.MIXTURE, DensityKind.GRID]))
    bounds = attr.ib(validator=attr.validators.instance_of(DomainBounds))
    means = attr.ib(default=None)
    covariances = attr.ib(default=None)
    mix_weights = attr.ib(default=None)
    values = attr.ib(default=None)

    def __attrs_post_init__(self):
        if self.kind == DensityKind.MIXTURE:
            self._validate_mixture()
        else:
            self._validate_grid()

    def _validate_mixture(self):
        if self.means is None or self.covariances is None or self.mix_weights is None:
            raise ValueError('Gaussian mixture density needs means, covariances and mixing weights')
        self.means = np.asarray(self.means, dtype=float).reshape(-1, 2)
        self.covariances = np.asarray(self.covariances, dtype=float).reshape(-1, 2, 2)
        self.mix_weights = np.asarray(self.mix_weights, dtype=float).ravel()
        k = self.means.shape[0]
        if self.covariances.shape[0] != k or self.mix_weights.shape[0] != k:
            raise ValueError(f'Mixture has {k} means but {self.covariances.shape[0]} covariances '
                             f'and {self.mix_weights.shape[0]} mixing weights')
        if np.any(self.mix_weights <= 0.0):
            raise ValueError(f'Mixing weights must be positive, got {self.mix_weights.tolist()}')
        total = math.fsum(self.mix_weights)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f'Mixing weights must sum to 1, got {total}')
        for i, cov in enumerate(self.covariances):
            if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12):
                raise ValueError(f'Covariance {i} is not symmetric: {cov.tolist()}')
            try:
                np.linalg.cholesky(cov)
            except np.linalg.LinAlgError:
                raise ValueError(f'Covariance {i} is not positive definite: {cov.tolist()}')

    def _validate_grid(self):
        if self.values is None:
            raise ValueError('Grid density needs cell values')
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.size == 0:
            raise ValueError(f'Grid values must be a non-empty 2-D array, got shape {self.values.shape}')
        if not np.all(np.isfinite(self.values)):
            raise ValueError('Grid values must be finite')
        if np.any(self.values < 0.0):
            raise ValueError('Grid values must be nonnegative')
        if not np.any(self.values > 0.0):
            raise ValueError('Grid must have at least one positive cell')

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape


@attr.s(eq=False)
class SamplePointCloud(object):
    positions = attr.ib(converter=lambda x: np.asarray(x, dtype=float).reshape(-1, 2))
    weights = attr.ib(converter=lambda x: np.asarray(x, dtype=float).ravel())

    @weights.validator
    def _validate_weights(self, attribute, value):
        if value.shape[0] != self.positions.shape[0]:
            raise ValueError(f'{self.positions.shape[0]} positions but {value.shape[0]} weights')
        if value.shape[0] == 0:
            raise ValueError('Sample-point cloud is empty')
        if np.any(value <= 0.0):
            raise ValueError('Sample-point weights must be positive')
        total = math.fsum(value)
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f'Sample-point weights must sum to 1 (within {MASS_TOL}), got {total!r}')

    @property
    def n(self) -> int:
        return self.positions.shape[0]


def gaussian_mixture(means, covariances, mix_weights, bounds: DomainBounds) -> DensitySpec:
    return DensitySpec(kind=DensityKind.MIXTURE,
                       bounds=bounds,
                       means=means,
                       covariances=covariances,
                       mix_weights=mix_weights)


def grid_density(values, bounds: DomainBounds) -> DensitySpec:
    return DensitySpec(kind=DensityKind.GRID, bounds=bounds, values=values)


def _grid_cell_indices(spec: DensitySpec, pts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    rows, cols = spec.shape
    b = spec.bounds
    # upper boundary belongs to the last cell
    i = np.minimum(np.floor((pts[:, 1] - b.ymin) / b.height * rows).astype(int), rows - 1)
    j = np.minimum(np.floor((pts[:, 0] - b.xmin) / b.width * cols).astype(int), cols - 1)
    return i, j


def evaluate_density_many(spec: DensitySpec, points: np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    inside = spec.bounds.contains(pts)
    if not np.all(inside):
        outside = pts[~inside][0]
        raise DomainError(f'Point ({outside[0]}, {outside[1]}) lies outside the density domain '
                          f'{spec.bounds.as_tuple()}')
    if spec.kind == DensityKind.GRID:
        i, j = _grid_cell_indices(spec, pts)
        return spec.values[i, j]
    out = np.zeros(pts.shape[0])
    for mean, cov, w in zip(spec.means, spec.covariances, spec.mix_weights):
        out += w * np.atleast_1d(multivariate_normal(mean=mean, cov=cov).pdf(pts))
    return out


def evaluate_density(spec: DensitySpec, point) -> float:
    """Density value at a single point inside the domain.

    Mixtures are evaluated exactly; grids by nearest (containing) cell lookup.

    Raises:
        DomainError: if `point` is outside `spec.bounds`
    """
    return float(evaluate_density_many(spec, np.asarray(point, dtype=float).reshape(1, 2))[0])


def density_upper_bound(spec: DensitySpec) -> float:
    if spec.kind == DensityKind.GRID:
        return float(spec.values.max())
    dets = np.linalg.det(spec.covariances)
    return float(np.sum(spec.mix_weights / (2.0 * np.pi * np.sqrt(dets))))


def sample_points(spec: DensitySpec,
                  n: int,
                  seed: int,
                  domain: Optional[DomainBounds] = None) -> SamplePointCloud:
    """Draw `n` sample-points from `spec` by rejection sampling.

    Proposals are uniform over `domain` with a uniform envelope at the density upper bound. Every point gets
    weight 1/n. The same seed always yields the same cloud.

    Args:
        spec: reference density
        n: number of sample-points
        seed: RNG seed
        domain: sampling domain; defaults to the density bounds and must lie inside them

    Returns:
        SamplePointCloud with uniform weights

    Raises:
        DegenerateDensityError: if the acceptance rate stays below 1e-6 after 2e6 proposals
    """
    if n < 1:
        raise ValueError(f'Number of sample-points must be at least 1, got {n}')
    domain = domain or spec.bounds
    if not domain.is_within(spec.bounds):
        raise DomainError(f'Sampling domain {domain.as_tuple()} extends beyond the density bounds '
                          f'{spec.bounds.as_tuple()}')
    envelope = density_upper_bound(spec)
    if not envelope > 0.0:
        raise DegenerateDensityError('Density is identically zero')
    rng = np.random.default_rng(seed)
    batch = max(1024, 4 * n)
    accepted = []
    n_accepted = 0
    n_proposed = 0
    while n_accepted < n:
        xs = rng.uniform(domain.xmin, domain.xmax, size=batch)
        ys = rng.uniform(domain.ymin, domain.ymax, size=batch)
        us = rng.uniform(0.0, envelope, size=batch)
        pts = np.column_stack([xs, ys])
        keep = pts[us < evaluate_density_many(spec, pts)]
        accepted.append(keep)
        n_accepted += keep.shape[0]
        n_proposed += batch
        if n_proposed >= MIN_PROPOSALS_FOR_DEGENERACY and n_accepted / n_proposed < MIN_ACCEPTANCE_RATE:
            raise DegenerateDensityError(f'Rejection sampling acceptance rate {n_accepted / n_proposed:.3e} '
                                         f'after {n_proposed} proposals is below {MIN_ACCEPTANCE_RATE}')
    positions = np.concatenate(accepted)[:n]
    logging.info('Sampled %s points (seed=%s) with acceptance rate %.4f', n, seed, n_accepted / n_proposed)
    return SamplePointCloud(positions=positions, weights=np.full(n, 1.0 / n))


def load_density_grid(path: str) -> DensitySpec:
    values, bounds = parse_grid_file(path)
    return grid_density(values, DomainBounds(*bounds))


def grid_cell_centres(bounds: DomainBounds, rows: int, cols: int) -> np.ndarray:
    """Cell centres in row-major order (row 0 at ymin) as an (rows*cols) x 2 array."""
    xs = bounds.xmin + (np.arange(cols) + 0.5) * bounds.width / cols
    ys = bounds.ymin + (np.arange(rows) + 0.5) * bounds.height / rows
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])


def write_density_grid(spec: DensitySpec, rows: int, cols: int, path: str) -> DensitySpec:
    """Export `spec` evaluated at the cell centres of a rows x cols grid over its bounds.

    Returns:
        the grid DensitySpec that was written
    """
    centres = grid_cell_centres(spec.bounds, rows, cols)
    values = evaluate_density_many(spec, centres).reshape(rows, cols)
    write_grid_file(path, values, spec.bounds.as_tuple())
    logging.info('Wrote %sx%s density grid to "%s"', rows, cols, path)
    return grid_density(values, spec.bounds)


def write_cloud(cloud: SamplePointCloud, path: str) -> None:
    write_xyw_table(path, cloud.positions, cloud.weights)
    logging.info('Wrote %s sample-points to "%s"', cloud.n, path)


def read_cloud(path: str) -> SamplePointCloud:
    df = read_xyw_table(path)
    return SamplePointCloud(positions=df[['x', 'y']].values, weights=df['weight'].values)
