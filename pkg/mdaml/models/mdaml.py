from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import cholesky
from scipy.special import softmax

from mdaml import logger
from mdaml.models.anchor import AnchorModel, GmmConfig, gmm_init
from mdaml.models.dataset import Dataset
from mdaml.models.rcgd import RcgdConfig, RcgdTrace, rcgd_minimize
from mdaml.models.spd import Array, SPDMatrix, airm_distance
from mdaml.models.triplet import IndexArray, TripletSet
from mdaml.resources.error import (
    ConfigError, DataError, DimensionError, InvariantViolationError,
    NumericError)

F_FLOOR = 1e-12
DESCENT_SLACK = 1e-9


@dataclass(frozen=True)
class MdamlParams:
    K: int  # pylint: disable=invalid-name
    lambda1: float
    lambda2: float = 1e-4
    eta: float = 3.0
    outer_max: int = 20
    outer_tol: float = 1e-4
    rcgd: RcgdConfig = field(default_factory=RcgdConfig)
    gmm: GmmConfig = field(default_factory=GmmConfig)
    seed: int = 0
    fixed_weights: bool = False
    clustering_only: bool = False

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ConfigError(f'K must be >= 1, got {self.K}')
        if self.clustering_only:
            object.__setattr__(self, 'lambda1', 0.0)
        elif not self.lambda1 > 0:
            raise ConfigError(f'lambda1 must be > 0, got {self.lambda1}')
        if not self.lambda2 > 0:
            raise ConfigError(f'lambda2 must be > 0, got {self.lambda2}')
        if not self.eta > 1:
            raise ConfigError(f'eta must be > 1, got {self.eta}')
        if self.outer_max < 1 or not self.outer_tol > 0:
            raise ConfigError('outer_max must be >= 1 and outer_tol > 0')
        if self.seed < 0:
            raise ConfigError('seed must be unsigned')

    @staticmethod
    def from_config(config: Mapping[str, Any]) -> MdamlParams:
        if config['K'] is None or config['LAMBDA1'] is None:
            raise ConfigError('K and LAMBDA1 have to be set (or tuned)')
        return MdamlParams(
            K=int(config['K']),
            lambda1=float(config['LAMBDA1']),
            lambda2=float(config['LAMBDA2']),
            eta=float(config['ETA']),
            outer_max=int(config['OUTER_MAX']),
            outer_tol=float(config['OUTER_TOL']),
            rcgd=RcgdConfig.from_config(config),
            gmm=GmmConfig.from_config(config),
            seed=int(config['SEED']),
            fixed_weights=bool(config['FIXED_WEIGHTS']))

    def to_dict(self) -> dict[str, Any]:
        return {
            'K': self.K,
            'lambda1': self.lambda1,
            'lambda2': self.lambda2,
            'eta': self.eta,
            'outer_max': self.outer_max,
            'outer_tol': self.outer_tol,
            'seed': self.seed,
            'fixed_weights': self.fixed_weights,
            'clustering_only': self.clustering_only,
            'rcgd': {
                'max_iters': self.rcgd.max_iters,
                'grad_tol': self.rcgd.grad_tol,
                'armijo_c': self.rcgd.armijo_c,
                'backtrack_factor': self.rcgd.backtrack_factor,
                'max_backtracks': self.rcgd.max_backtracks,
                'initial_step': self.rcgd.initial_step,
                'beta_rule': self.rcgd.beta_rule.value,
                'transport': self.rcgd.transport.value,
                'fixed_beta': self.rcgd.fixed_beta,
                'step_memory': self.rcgd.step_memory},
            'gmm': {
                'max_iter': self.gmm.max_iter,
                'tol': self.gmm.tol,
                'reg_covar': self.gmm.reg_covar,
                'min_weight': self.gmm.min_weight,
                'max_reseeds': self.gmm.max_reseeds}}


@dataclass
class FitReport:
    objective_per_outer: list[float] = field(default_factory=list)
    objective_per_step: list[float] = field(default_factory=list)
    outer_iters: int = 0
    converged: bool = False
    rcgd_traces: list[RcgdTrace] = field(default_factory=list)
    wall_time_seconds: float = 0.0
    metric_distance: float = 0.0  # AIRM distance from the identity

    def to_dict(self, include_timing: bool = False) -> dict[str, Any]:
        data: dict[str, Any] = {
            'objective_per_outer': self.objective_per_outer,
            'objective_per_step': self.objective_per_step,
            'outer_iters': self.outer_iters,
            'converged': self.converged,
            'rcgd_traces': [trace.to_dict() for trace in self.rcgd_traces],
            'metric_distance': self.metric_distance}
        if include_timing:
            data['wall_time_seconds'] = self.wall_time_seconds
        return data


def _matrix(m: SPDMatrix | Any) -> Array:
    return m.data if isinstance(m, SPDMatrix) else np.asarray(m, dtype=float)


def _quadratic_rows(m: Array, diffs: Array) -> Array:
    return np.einsum('nd,de,ne->n', diffs, m, diffs)


def mahalanobis_sq(m: SPDMatrix | Any, x: Any, y: Any) -> float:
    matrix = _matrix(m)
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    if diff.ndim != 1 or matrix.shape != (diff.shape[0], diff.shape[0]):
        raise DimensionError(
            f'vectors of shape {np.shape(x)}, {np.shape(y)} do not match '
            f'metric {matrix.shape}')
    return float(diff @ matrix @ diff)


def hinge_values(x: Any) -> Array:
    x_ = np.asarray(x, dtype=float)
    return np.where(
        x_ >= 1,
        0.0,
        np.where(x_ <= 0, 0.5 - x_, 0.5 * (1 - x_) ** 2))


def hinge_slopes(x: Any) -> Array:
    x_ = np.asarray(x, dtype=float)
    return np.where(x_ >= 1, 0.0, np.where(x_ <= 0, -1.0, x_ - 1))


def smooth_hinge(x: float) -> float:
    return float(hinge_values(x))


def smooth_hinge_deriv(x: float) -> float:
    return float(hinge_slopes(x))


def _check_consistent(
        anchors: AnchorModel,
        data: Dataset,
        p: MdamlParams) -> None:
    if anchors.weights.shape != (data.n, p.K) \
            or anchors.centers.shape != (p.K, data.d):
        raise DimensionError(
            f'anchors with centers {anchors.centers.shape} and weights '
            f'{anchors.weights.shape} do not fit N={data.n}, d={data.d}, '
            f'K={p.K}')


def _check_triplets(trips: TripletSet, data: Dataset, p: MdamlParams) -> None:
    if not trips.count and not p.clustering_only:
        raise DataError('the triplet set is empty')
    trips.check(data.n)


class MetricProblem:
    """Objective and Euclidean gradient in M with anchors held fixed.

    The clustering term is linear in M, so it is kept as one scatter
    matrix. Triplets are kept as their two difference vectors and the
    locality weight of each triplet."""

    def __init__(
            self,
            anchors: AnchorModel,
            data: Dataset,
            trips: TripletSet,
            p: MdamlParams) -> None:
        _check_consistent(anchors, data, p)
        _check_triplets(trips, data, p)
        self.p = p
        x = data.features
        powered = anchors.weights ** p.eta
        scatter = np.zeros((data.d, data.d))
        for k in range(p.K):
            diff = x - anchors.centers[k]
            scatter += (diff * powered[:, k, None]).T @ diff
        self.scatter = scatter / (data.n * p.K)
        self.similar = x[trips.first] - x[trips.second]
        self.dissimilar = x[trips.first] - x[trips.third]
        if p.fixed_weights:
            self.pair_weights = np.full(trips.count, float(p.K))
        else:
            self.pair_weights = np.sum(
                powered[trips.first] * powered[trips.second], axis=1)
        self.triplet_scale = p.lambda1 / (p.K * trips.count) \
            if trips.count else 0.0

    def margins(self, m: SPDMatrix | Any) -> Array:
        matrix = _matrix(m)
        return _quadratic_rows(matrix, self.dissimilar) \
            - _quadratic_rows(matrix, self.similar)

    def cost(self, m: SPDMatrix | Any) -> float:
        matrix = _matrix(m)
        value = float(np.sum(matrix * self.scatter))
        if self.triplet_scale:
            value += self.triplet_scale * float(
                self.pair_weights @ hinge_values(self.margins(matrix)))
        return value + self.p.lambda2 / 2 * float(np.sum(matrix * matrix))

    def gradient(self, m: SPDMatrix | Any) -> Array:
        matrix = _matrix(m)
        gradient = self.scatter + self.p.lambda2 * matrix
        if self.triplet_scale:
            coefficients = self.triplet_scale * self.pair_weights \
                * hinge_slopes(self.margins(matrix))
            weighted = coefficients[:, None]
            gradient = gradient \
                + (self.dissimilar * weighted).T @ self.dissimilar \
                - (self.similar * weighted).T @ self.similar
        return gradient


def objective(
        m: SPDMatrix,
        anchors: AnchorModel,
        data: Dataset,
        trips: TripletSet,
        p: MdamlParams) -> float:
    return MetricProblem(anchors, data, trips, p).cost(m)


def euclidean_gradient(
        m: SPDMatrix,
        anchors: AnchorModel,
        data: Dataset,
        trips: TripletSet,
        p: MdamlParams) -> Array:
    return MetricProblem(anchors, data, trips, p).gradient(m)


def update_centers(
        m: SPDMatrix,
        weights: Any,
        data: Dataset,
        eta: float) -> Array:
    """Weighted means, the quadratic form in M cancels out."""
    del m
    powered = np.asarray(weights, dtype=float) ** eta
    if powered.shape[0] != data.n:
        raise DimensionError(
            f'{powered.shape[0]} weight rows for {data.n} samples')
    mass = powered.sum(axis=0)
    if not np.all(mass > 0):
        raise NumericError('zero weight mass for an anchor center')
    return (powered.T @ data.features) / mass[:, None]


def update_weights(f: Any, eta: float) -> Array:
    if not eta > 1:
        raise ConfigError(f'eta must be > 1, got {eta}')
    f_ = np.asarray(f, dtype=float)
    if not np.all(np.isfinite(f_)):
        raise NumericError('non-finite F values')
    if not np.all(f_ > 0):
        raise NumericError('F values must be positive')
    return softmax(-np.log(f_) / (eta - 1), axis=-1)


def _center_distances(m: SPDMatrix, centers: Array, data: Dataset) -> Array:
    return np.stack(
        [_quadratic_rows(m.data, data.features - center)
         for center in centers],
        axis=1)


def _triplet_losses(m: SPDMatrix, data: Dataset, trips: TripletSet) -> Array:
    x = data.features
    return hinge_values(
        _quadratic_rows(m.data, x[trips.first] - x[trips.third])
        - _quadratic_rows(m.data, x[trips.first] - x[trips.second]))


def _f_row(
        distances: Array,
        n: int,
        p: MdamlParams,
        trips: TripletSet,
        losses: Array,
        powered: Array,
        as_first: IndexArray,
        as_second: IndexArray) -> Array:
    row = distances / n
    if p.lambda1 and not p.fixed_weights and trips.count:
        row = row + p.lambda1 / trips.count * (
            losses[as_first] @ powered[trips.second[as_first]]
            + losses[as_second] @ powered[trips.first[as_second]])
    return np.maximum(row, F_FLOOR)


def compute_F(  # pylint: disable=invalid-name
        m: SPDMatrix,
        anchors: AnchorModel,
        data: Dataset,
        trips: TripletSet,
        i: int,
        p: MdamlParams) -> Array:
    if not 0 <= i < data.n:
        raise DataError(f'sample index {i} out of range for {data.n}')
    _check_consistent(anchors, data, p)
    distances = _quadratic_rows(
        m.data,
        data.features[i] - anchors.centers)
    return _f_row(
        distances,
        data.n,
        p,
        trips,
        _triplet_losses(m, data, trips),
        anchors.weights ** p.eta,
        np.flatnonzero(trips.first == i),
        np.flatnonzero(trips.second == i))


def _positions(index: IndexArray, n: int) -> list[IndexArray]:
    order = np.argsort(index, kind='stable')
    bounds = np.concatenate([[0], np.cumsum(np.bincount(index, minlength=n))])
    return [order[bounds[i]:bounds[i + 1]] for i in range(n)]


def sweep_weights(
        m: SPDMatrix,
        anchors: AnchorModel,
        data: Dataset,
        trips: TripletSet,
        p: MdamlParams) -> AnchorModel:
    """Gauss-Seidel pass over samples in ascending order, every row solved
    with the freshly updated rows before it."""
    distances = _center_distances(m, anchors.centers, data)
    if not p.lambda1 or p.fixed_weights or not trips.count:
        return AnchorModel(
            anchors.centers,
            update_weights(np.maximum(distances / data.n, F_FLOOR), p.eta))
    losses = _triplet_losses(m, data, trips)
    as_first = _positions(trips.first, data.n)
    as_second = _positions(trips.second, data.n)
    weights = np.array(anchors.weights)
    powered = weights ** p.eta
    for i in range(data.n):
        row = _f_row(
            distances[i],
            data.n,
            p,
            trips,
            losses,
            powered,
            as_first[i],
            as_second[i])
        weights[i] = update_weights(row, p.eta)
        powered[i] = weights[i] ** p.eta
    return AnchorModel(anchors.centers, weights)


def _check_descent(before: float, after: float, step: str) -> None:
    if not math.isfinite(after):
        raise NumericError(f'non-finite objective after {step} update')
    if after > before + DESCENT_SLACK * max(1.0, abs(before)):
        raise InvariantViolationError(
            f'objective increased from {before!r} to {after!r} in {step} '
            'update')


def fit(
        data: Dataset,
        trips: TripletSet,
        p: MdamlParams,
        m0: Optional[SPDMatrix] = None) -> tuple[
            SPDMatrix, AnchorModel, FitReport]:
    started = time.perf_counter()
    _check_triplets(trips, data, p)
    report = FitReport()
    m = m0 or SPDMatrix.identity(data.d)
    anchors = gmm_init(data, p.K, p.seed, p.gmm)
    value = objective(m, anchors, data, trips, p)
    report.objective_per_outer.append(value)
    report.objective_per_step.append(value)
    for outer in range(1, p.outer_max + 1):
        start_value = value
        anchors = AnchorModel(
            update_centers(m, anchors.weights, data, p.eta),
            anchors.weights)
        value = _step(report, 'center', value, m, anchors, data, trips, p)
        anchors = sweep_weights(m, anchors, data, trips, p)
        value = _step(report, 'weight', value, m, anchors, data, trips, p)
        problem = MetricProblem(anchors, data, trips, p)
        m, trace = rcgd_minimize(m, problem.cost, problem.gradient, p.rcgd)
        report.rcgd_traces.append(trace)
        value = _step(report, 'metric', value, m, anchors, data, trips, p)
        report.objective_per_outer.append(value)
        report.outer_iters = outer
        decrease = (start_value - value) / max(abs(start_value), F_FLOOR)
        logger.log(
            'debug',
            'fit',
            f'outer {outer}: objective {value:.6g}, relative decrease '
            f'{decrease:.3g}')
        if decrease < p.outer_tol:
            report.converged = True
            break
    report.metric_distance = airm_distance(SPDMatrix.identity(data.d), m)
    report.wall_time_seconds = time.perf_counter() - started
    logger.log(
        'info',
        'fit',
        f'{report.outer_iters} outer iterations, converged '
        f'{report.converged}, objective {value:.6g}')
    return m, anchors, report


def _step(
        report: FitReport,
        name: str,
        before: float,
        m: SPDMatrix,
        anchors: AnchorModel,
        data: Dataset,
        trips: TripletSet,
        p: MdamlParams) -> float:
    value = objective(m, anchors, data, trips, p)
    _check_descent(before, value, name)
    report.objective_per_step.append(value)
    return value


def transform(m: SPDMatrix, features: Any) -> Array:
    """Map features with L, M = L L^T, so that Euclidean distances of the
    result are Mahalanobis distances of the input."""
    array = np.asarray(features, dtype=float)
    if array.shape[-1] != m.dim:
        raise DimensionError(
            f'features with {array.shape[-1]} columns for a {m.dim} metric')
    lower: NDArray[np.float64] = cholesky(m.data, lower=True)
    return array @ lower
