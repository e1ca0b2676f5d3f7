from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from mdaml import logger
from mdaml.models.dataset import Dataset, fit_normalizer
from mdaml.models.knn import evaluate
from mdaml.models.mdaml import MdamlParams, fit
from mdaml.models.protocol import (
    SplitSpec, generate_triplets, split_indices, stream_seed,
    stratified_split)
from mdaml.models.spd import SPDMatrix
from mdaml.models.triplet import TripletSet
from mdaml.resources.error import ConfigError, MdamlError, NumericError

EUCLID = 'EUCLID'
MDAML = 'MDaML'
FIXED = 'Fixed-weight'
SWEEP_PARAMETERS = ('K', 'lambda1', 'lambda2', 'eta')

# Stream ids next to the trial index
TRIPLET_STREAM = 1
GMM_STREAM = 2
TUNE_STREAM = 3


@dataclass(frozen=True)
class EvalOptions:
    per_anchor_similar: int = 10
    per_anchor_dissimilar: int = 10
    cross_product: bool = False
    knn_k: int = 3
    normalize: bool = True
    workers: int = 0

    def __post_init__(self) -> None:
        if self.knn_k < 1:
            raise ConfigError(f'kNN k must be >= 1, got {self.knn_k}')
        if self.per_anchor_similar < 1 or self.per_anchor_dissimilar < 1:
            raise ConfigError('triplet counts per anchor must be >= 1')
        if self.workers < 0:
            raise ConfigError('workers must be >= 0')

    @staticmethod
    def from_config(config: Mapping[str, Any]) -> EvalOptions:
        return EvalOptions(
            per_anchor_similar=int(config['PER_ANCHOR_SIMILAR']),
            per_anchor_dissimilar=int(config['PER_ANCHOR_DISSIMILAR']),
            cross_product=bool(config['CROSS_PRODUCT_TRIPLETS']),
            knn_k=int(config['KNN_K']),
            normalize=bool(config['NORMALIZE']),
            workers=int(config['WORKERS']))

    @property
    def n_jobs(self) -> int:
        return self.workers or -1


@dataclass
class TrialResult:
    trial: int
    accuracy: dict[str, float] = field(default_factory=dict)
    objective_per_outer: dict[str, list[float]] = field(default_factory=dict)
    outer_iters: dict[str, int] = field(default_factory=dict)
    converged: dict[str, bool] = field(default_factory=dict)
    train_seconds: dict[str, float] = field(default_factory=dict)


@dataclass
class BenchmarkReport:
    methods: list[str]
    params: MdamlParams
    trials: list[TrialResult]
    tuning: Optional[list[dict[str, Any]]] = None

    def accuracies(self, method: str) -> list[float]:
        return [trial.accuracy[method] for trial in self.trials]

    def mean(self, method: str) -> float:
        return float(np.mean(self.accuracies(method)))

    def std(self, method: str) -> float:
        return float(np.std(self.accuracies(method)))

    def summary(self) -> dict[str, dict[str, Any]]:
        return {
            method: {
                'mean': self.mean(method),
                'std': self.std(method),
                'min': min(self.accuracies(method)),
                'max': max(self.accuracies(method)),
                'per_trial': self.accuracies(method)}
            for method in self.methods}

    def to_dict(self, include_timing: bool = False) -> dict[str, Any]:
        data: dict[str, Any] = {
            'methods': self.methods,
            'params': self.params.to_dict(),
            'summary': self.summary(),
            'trials': [],
            'tuning': self.tuning}
        for trial in self.trials:
            entry: dict[str, Any] = {
                'trial': trial.trial,
                'accuracy': trial.accuracy,
                'objective_per_outer': trial.objective_per_outer,
                'outer_iters': trial.outer_iters,
                'converged': trial.converged}
            if include_timing:
                entry['train_seconds'] = trial.train_seconds
            data['trials'].append(entry)
        return data

    def rows(self, include_timing: bool = False) -> list[dict[str, Any]]:
        rows = []
        for trial in self.trials:
            for method in self.methods:
                row: dict[str, Any] = {
                    'trial': trial.trial,
                    'method': method,
                    'accuracy': trial.accuracy[method],
                    'outer_iters': trial.outer_iters.get(method),
                    'converged': trial.converged.get(method)}
                if include_timing:
                    row['train_seconds'] = trial.train_seconds.get(method)
                rows.append(row)
        return rows

    def trace_rows(self) -> list[dict[str, Any]]:
        return [
            {'trial': trial.trial,
             'method': method,
             'outer': outer,
             'objective': value}
            for trial in self.trials
            for method, trace in trial.objective_per_outer.items()
            for outer, value in enumerate(trace)]


def prepare_trial(
        data: Dataset,
        spec: SplitSpec,
        options: EvalOptions,
        trial: int) -> tuple[Dataset, Dataset, TripletSet]:
    train, test = stratified_split(data, spec, trial)
    if options.normalize:
        normalizer = fit_normalizer(train)
        train, test = normalizer.apply(train), normalizer.apply(test)
    triplets = generate_triplets(
        train,
        options.per_anchor_similar,
        options.per_anchor_dissimilar,
        stream_seed(spec.seed, trial, TRIPLET_STREAM),
        options.cross_product)
    return train, test, triplets


def variants(p: MdamlParams) -> list[tuple[str, MdamlParams]]:
    result = [(MDAML, replace(p, fixed_weights=False))]
    if p.fixed_weights:
        result.append((FIXED, p))
    return result


def run_trial(
        data: Dataset,
        spec: SplitSpec,
        p: MdamlParams,
        options: EvalOptions,
        trial: int,
        log_state: Optional[dict[str, Any]] = None) -> TrialResult:
    if log_state:  # Pool workers import a fresh, silent logger
        logger.restore(log_state)
    try:
        train, test, triplets = prepare_trial(data, spec, options, trial)
        result = TrialResult(trial)
        result.accuracy[EUCLID] = evaluate(
            SPDMatrix.identity(data.d), train, test, options.knn_k)
        result.train_seconds[EUCLID] = 0.0
        seed = stream_seed(p.seed, trial, GMM_STREAM)
        for name, params in variants(p):
            started = time.perf_counter()
            m, _, report = fit(train, triplets, replace(params, seed=seed))
            result.train_seconds[name] = time.perf_counter() - started
            result.accuracy[name] = evaluate(m, train, test, options.knn_k)
            result.objective_per_outer[name] = report.objective_per_outer
            result.outer_iters[name] = report.outer_iters
            result.converged[name] = report.converged
    except MdamlError as e:
        raise type(e)(f'trial {trial}: {e}') from e
    logger.log(
        'info',
        'benchmark',
        f'trial {trial}: ' + ', '.join(
            f'{name} {value:.4f}' for name, value in result.accuracy.items()))
    return result


def tune_parameters(
        train: Dataset,
        spec: SplitSpec,
        p: MdamlParams,
        options: EvalOptions,
        k_grid: Sequence[int],
        lambda1_grid: Sequence[float]) \
        -> tuple[MdamlParams, list[dict[str, Any]]]:
    """Grid search of K and lambda1 on a stratified hold-out of the first
    trial's training data. Ties keep the first grid point."""
    inner_spec = replace(
        spec,
        trials=1,
        seed=stream_seed(spec.seed, 0, TUNE_STREAM))
    fit_index, holdout_index = split_indices(train, inner_spec, 0)
    inner, holdout = train.subset(fit_index), train.subset(holdout_index)
    triplets = generate_triplets(
        inner,
        options.per_anchor_similar,
        options.per_anchor_dissimilar,
        stream_seed(spec.seed, 0, TUNE_STREAM, TRIPLET_STREAM),
        options.cross_product)
    scores: list[dict[str, Any]] = []
    best: Optional[tuple[float, MdamlParams]] = None
    for k in k_grid:
        if k > inner.n:
            logger.log('notice', 'benchmark', f'K={k} skipped, N={inner.n}')
            continue
        for lambda1 in lambda1_grid:
            try:
                candidate = replace(p, K=int(k), lambda1=float(lambda1))
                m, _, _ = fit(inner, triplets, candidate)
                score = evaluate(m, inner, holdout, options.knn_k)
            except MdamlError as e:
                logger.log(
                    'warn',
                    'benchmark',
                    f'tuning K={k}, lambda1={lambda1} failed',
                    e)
                continue
            scores.append({'K': int(k), 'lambda1': float(lambda1),
                           'accuracy': score})
            if best is None or score > best[0]:
                best = (score, candidate)
    if best is None:
        raise NumericError('no grid point could be fitted while tuning')
    logger.log(
        'info',
        'benchmark',
        f'tuned K={best[1].K}, lambda1={best[1].lambda1}, hold-out accuracy '
        f'{best[0]:.4f}')
    return best[1], scores


def run_benchmark(
        data: Dataset,
        spec: SplitSpec,
        p: MdamlParams,
        options: Optional[EvalOptions] = None,
        tune_grid: Optional[tuple[Sequence[int], Sequence[float]]] = None) \
        -> BenchmarkReport:
    options = options or EvalOptions()
    data.require_labels()
    tuning = None
    if tune_grid:
        train, _, _ = prepare_trial(data, spec, options, 0)
        p, tuning = tune_parameters(train, spec, p, options, *tune_grid)
    log_state = logger.state()
    results = Parallel(n_jobs=options.n_jobs)(
        delayed(run_trial)(data, spec, p, options, trial, log_state)
        for trial in range(spec.trials))
    report = BenchmarkReport(
        [EUCLID] + [name for name, _ in variants(p)],
        p,
        list(results),
        tuning)
    logger.log(
        'info',
        'benchmark',
        ', '.join(
            f'{method} {report.mean(method):.4f} +- {report.std(method):.4f}'
            for method in report.methods))
    return report


def _coerce(parameter: str, value: Any) -> float | int:
    if parameter == 'K':
        number = float(value)
        if not number.is_integer():
            raise ConfigError(f'K must be an integer, got {value}')
        return int(number)
    return float(value)


@dataclass
class SweepResult:
    parameter: str
    rows: list[dict[str, Any]] = field(default_factory=list)
    failures: list[dict[str, Any]] = field(default_factory=list)
    reports: list[BenchmarkReport] = field(default_factory=list)


def run_sweep(
        data: Dataset,
        spec: SplitSpec,
        p: MdamlParams,
        parameter: str,
        values: Sequence[Any],
        options: Optional[EvalOptions] = None) -> SweepResult:
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError(
            f'unknown sweep parameter {parameter}, use one of '
            f'{", ".join(SWEEP_PARAMETERS)}')
    if not values:
        raise ConfigError('sweep values are empty')
    result = SweepResult(parameter)
    for value in values:
        try:
            params = replace(p, **{parameter: _coerce(parameter, value)})
            report = run_benchmark(data, spec, params, options)
        except (MdamlError, ValueError) as e:
            logger.log(
                'error',
                'sweep',
                f'{parameter}={value} failed',
                e)
            result.failures.append({
                'parameter': parameter,
                'value': value,
                'error': type(e).__name__,
                'exit': getattr(e, 'exit_code', ConfigError.exit_code),
                'message': str(e)})
            continue
        result.reports.append(report)
        for method, stats in report.summary().items():
            result.rows.append({
                'parameter': parameter,
                'value': value,
                'method': method,
                'mean': stats['mean'],
                'std': stats['std']})
    return result
