from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np
from scipy.special import logsumexp
from sklearn.cluster import kmeans_plusplus

from mdaml import logger
from mdaml.models.dataset import Dataset
from mdaml.models.spd import Array
from mdaml.resources.error import (
    ConfigError, InitializationError, InvariantViolationError)

SIMPLEX_TOL = 1e-10


class AnchorModel:
    """Locality centers c_k and the per-sample simplex weights w_ik."""

    def __init__(self, centers: Any, weights: Any) -> None:
        centers_ = np.array(centers, dtype=float)
        weights_ = np.array(weights, dtype=float)
        if centers_.ndim != 2 or weights_.ndim != 2 \
                or centers_.shape[0] != weights_.shape[1]:
            raise InvariantViolationError(
                f'centers {centers_.shape} do not match weights '
                f'{weights_.shape}')
        if not np.all(weights_ > 0):
            raise InvariantViolationError('anchor weights must be positive')
        if np.max(np.abs(weights_.sum(axis=1) - 1), initial=0) > SIMPLEX_TOL:
            raise InvariantViolationError('anchor weight rows must sum to 1')
        centers_.flags.writeable = False
        weights_.flags.writeable = False
        self.centers: Array = centers_
        self.weights: Array = weights_

    @property
    def k(self) -> int:
        return int(self.centers.shape[0])

    def to_dict(self) -> dict[str, Any]:
        return {
            'centers': self.centers.tolist(),
            'weights': self.weights.tolist()}


@dataclass(frozen=True)
class GmmConfig:
    max_iter: int = 100
    tol: float = 1e-6
    reg_covar: float = 1e-6
    min_weight: float = 1e-8
    max_reseeds: int = 10

    @staticmethod
    def from_config(config: Mapping[str, Any]) -> GmmConfig:
        return GmmConfig(
            max_iter=int(config['GMM_MAX_ITER']),
            tol=float(config['GMM_TOL']),
            reg_covar=float(config['GMM_REG_COVAR']),
            min_weight=float(config['GMM_MIN_WEIGHT']),
            max_reseeds=int(config['GMM_MAX_RESEEDS']))


def _log_gaussian_diag(x: Array, means: Array, variances: Array) -> Array:
    precisions = 1.0 / variances
    squared = (
        (x * x) @ precisions.T
        - 2 * x @ (means * precisions).T
        + np.sum(means * means * precisions, axis=1))
    return -0.5 * (
        x.shape[1] * np.log(2 * np.pi)
        + np.sum(np.log(variances), axis=1)
        + squared)


def _farthest_point(x: Array, centers: Array) -> Array:
    distances = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return np.array(x[int(np.argmax(distances.min(axis=1)))])


def _normalized(responsibilities: Array, floor: float) -> Array:
    clamped = np.maximum(responsibilities, floor)
    return clamped / clamped.sum(axis=1, keepdims=True)


def gmm_init(
        data: Dataset,
        k: int,
        seed: int = 0,
        cfg: GmmConfig = GmmConfig()) -> AnchorModel:
    x = data.features
    n = data.n
    if k < 1 or n < k:
        raise ConfigError(f'K={k} needs 1 <= K <= N={n}')
    if k == 1:
        return AnchorModel(x.mean(axis=0, keepdims=True), np.ones((n, 1)))
    means, _ = kmeans_plusplus(x, k, random_state=seed)
    base_variance = x.var(axis=0) + cfg.reg_covar
    variances = np.tile(base_variance, (k, 1))
    mixing = np.full(k, 1.0 / k)
    previous = -np.inf
    reseeds = 0
    for _ in range(cfg.max_iter):
        log_prob = _log_gaussian_diag(x, means, variances) + np.log(mixing)
        log_norm = logsumexp(log_prob, axis=1)
        responsibilities = np.exp(log_prob - log_norm[:, None])
        mass = responsibilities.sum(axis=0)
        if (empty := np.flatnonzero(mass < np.finfo(float).eps * n)).size:
            reseeds += empty.size
            if reseeds > cfg.max_reseeds:
                raise InitializationError(
                    f'GMM components kept collapsing after {reseeds} '
                    're-seeds')
            for component in empty:
                others = np.delete(means, component, axis=0)
                means[component] = _farthest_point(x, others)
                variances[component] = base_variance
                mixing[component] = 1.0 / k
            mixing /= mixing.sum()
            logger.log(
                'warn',
                'gmm',
                f're-seeded {empty.size} empty components')
            previous = -np.inf
            continue
        likelihood = float(log_norm.sum())
        if np.isfinite(previous) \
                and abs(likelihood - previous) <= cfg.tol * abs(previous):
            break
        previous = likelihood
        mixing = mass / n
        means = responsibilities.T @ x / mass[:, None]
        variances = np.maximum(
            responsibilities.T @ (x * x) / mass[:, None] - means ** 2,
            0.0) + cfg.reg_covar
    log_prob = _log_gaussian_diag(x, means, variances) + np.log(mixing)
    responsibilities = np.exp(
        log_prob - logsumexp(log_prob, axis=1)[:, None])
    return AnchorModel(means, _normalized(responsibilities, cfg.min_weight))
