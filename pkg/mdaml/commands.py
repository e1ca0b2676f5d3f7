from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Callable, Optional

import click

from mdaml import config, logger
from mdaml.models.benchmark import (
    SWEEP_PARAMETERS, TRIPLET_STREAM, run_benchmark, run_sweep,
    tune_parameters)
from mdaml.models.dataset import Dataset, fit_normalizer, load_csv
from mdaml.models.gradcheck import check, run_gradcheck
from mdaml.models.knn import evaluate as knn_evaluate
from mdaml.models.mdaml import fit
from mdaml.models.model_file import TrainedModel
from mdaml.models.protocol import generate_triplets, stream_seed
from mdaml.models.run_config import RunConfig
from mdaml.models.spd import SPDMatrix
from mdaml.models.synthetic import make_multimodal
from mdaml.resources.error import ConfigError, DataError, MdamlError
from mdaml.storage import csv as csv_storage
from mdaml.storage import model as model_storage


class MdamlGroup(click.Group):
    """Turns domain errors into one machine readable line and an exit code."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except MdamlError as e:
            self.exit_with(ctx, e)
        except OSError as e:  # Unreadable inputs, unwritable outputs
            self.exit_with(
                ctx,
                DataError(
                    f'cannot access {e.filename}: {e.strerror}'
                    if e.filename else str(e)))

    @staticmethod
    def exit_with(ctx: click.Context, error: MdamlError) -> None:
        click.echo(
            f'error={type(error).__name__} exit={error.exit_code} '
            f'message={json.dumps(str(error))}',
            err=True)
        logger.log('error', 'cli', type(error).__name__, error)
        ctx.exit(error.exit_code)


def run_options(function: Callable[..., Any]) -> Callable[..., Any]:
    for option in reversed([
            click.option(
                '--config', 'config_file',
                type=click.Path(dir_okay=False),
                help='JSON run config with upper case keys'),
            click.option('--data', help='CSV dataset'),
            click.option('--label', help='Label column name or index'),
            click.option('--no-header', is_flag=True, help='No header row'),
            click.option('--k', 'k', type=int, help='Number of anchors K'),
            click.option('--lambda1', type=float),
            click.option('--lambda2', type=float),
            click.option('--eta', type=float),
            click.option('--trials', type=int),
            click.option('--train-fraction', type=float),
            click.option('--no-stratify', is_flag=True),
            click.option('--seed', type=int),
            click.option('--workers', type=int, help='0 uses all cores'),
            click.option('--tune', is_flag=True, help='Tune K and lambda1'),
            click.option('--fixed-weights', is_flag=True),
            click.option('--cross-product-triplets', is_flag=True),
            click.option('--include-timing', is_flag=True),
            click.option('--out', type=click.Path(file_okay=False))]):
        function = option(function)
    return function


def build_config(
        config_file: Optional[str],
        model: bool = True,
        **flags: Any) -> RunConfig:
    return RunConfig.build(
        config_file,
        {
            'DATA': flags.get('data'),
            'LABEL': flags.get('label'),
            'HEADER': False if flags.get('no_header') else None,
            'K': flags.get('k'),
            'LAMBDA1': flags.get('lambda1'),
            'LAMBDA2': flags.get('lambda2'),
            'ETA': flags.get('eta'),
            'TRIALS': flags.get('trials'),
            'TRAIN_FRACTION': flags.get('train_fraction'),
            'STRATIFIED': False if flags.get('no_stratify') else None,
            'SEED': flags.get('seed'),
            'WORKERS': flags.get('workers'),
            'TUNE': True if flags.get('tune') else None,
            'FIXED_WEIGHTS': True if flags.get('fixed_weights') else None,
            'CROSS_PRODUCT_TRIPLETS':
                True if flags.get('cross_product_triplets') else None,
            'INCLUDE_TIMING': True if flags.get('include_timing') else None,
            'OUTPUT_PATH': flags.get('out')},
        model)


def load_data(run: RunConfig, path: Optional[str | Path] = None) -> Dataset:
    return load_csv(path or run.data_path, run['LABEL'], run['HEADER'])


@click.group(cls=MdamlGroup)
@click.version_option(config['VERSION'], prog_name='mdaml')
@click.option(
    '--log-level',
    type=click.IntRange(0, 7),
    help='Syslog priority, 7 shows debug messages')
@click.option('--log-file', type=click.Path(dir_okay=False))
def cli(log_level: Optional[int], log_file: Optional[str]) -> None:
    """Multimodal-aware weakly supervised Mahalanobis metric learning."""
    logger.setup(log_level, log_file)


@cli.command()
@run_options
def train(config_file: Optional[str], **flags: Any) -> None:
    """Learn a metric on the whole dataset and write model.json."""
    run = build_config(config_file, **flags)
    data = load_data(run)
    normalizer = fit_normalizer(data) if run['NORMALIZE'] else None
    samples = normalizer.apply(data) if normalizer else data
    options = run.options()
    params = run.params()
    if grid := run.tune_grid():
        params, _ = tune_parameters(
            samples, run.split(), params, options, *grid)
    triplets = generate_triplets(
        samples,
        options.per_anchor_similar,
        options.per_anchor_dissimilar,
        stream_seed(params.seed, 0, TRIPLET_STREAM),
        options.cross_product)
    m, anchors, report = fit(samples, triplets, params)
    path = run.out_path / 'model.json'
    TrainedModel(
        m,
        anchors,
        params.to_dict(),
        normalizer,
        data.classes,
        report).save(path, run['INCLUDE_TIMING'])
    click.echo(
        f'model={path} outer_iters={report.outer_iters} '
        f'converged={str(report.converged).lower()} '
        f'objective={report.objective_per_outer[-1]:.6g}')


@cli.command()
@click.option('--config', 'config_file', type=click.Path(dir_okay=False))
@click.option(
    '--model', 'model_path',
    required=True,
    type=click.Path(dir_okay=False))
@click.option('--train', 'train_path', required=True, help='Neighbour pool')
@click.option('--test', 'test_path', required=True)
@click.option('--label')
@click.option('--no-header', is_flag=True)
@click.option('--knn-k', type=int)
@click.option('--out', type=click.Path(file_okay=False))
def evaluate(
        config_file: Optional[str],
        model_path: str,
        train_path: str,
        test_path: str,
        knn_k: Optional[int],
        **flags: Any) -> None:
    """kNN accuracy of a saved model, next to the Euclidean baseline."""
    run = build_config(config_file, model=False, **flags)
    if knn_k is not None:
        run.values['KNN_K'] = knn_k
    k = run.options().knn_k
    model = TrainedModel.load(model_path)
    train_set, test_set = load_data(run, train_path), \
        load_data(run, test_path)
    if model.normalizer:
        train_set = model.normalizer.apply(train_set)
        test_set = model.normalizer.apply(test_set)
    accuracy = {
        'EUCLID': knn_evaluate(
            SPDMatrix.identity(model.metric.dim),
            train_set,
            test_set,
            k),
        'MDaML': knn_evaluate(model.metric, train_set, test_set, k)}
    model_storage.write_json(
        run.out_path / 'evaluation.json',
        {'k': k, 'model': str(model_path), 'accuracy': accuracy})
    click.echo(' '.join(
        f'{method}={value:.4f}' for method, value in accuracy.items()))


@cli.command()
@run_options
def benchmark(config_file: Optional[str], **flags: Any) -> None:
    """Repeated split, train and 3NN evaluation against EUCLID."""
    run = build_config(config_file, **flags)
    report = run_benchmark(
        load_data(run),
        run.split(),
        run.params(),
        run.options(),
        run.tune_grid())
    timing = bool(run['INCLUDE_TIMING'])
    model_storage.write_json(
        run.out_path / 'benchmark.json',
        report.to_dict(timing))
    csv_storage.write_rows(run.out_path / 'benchmark.csv', report.rows(timing))
    csv_storage.write_rows(
        run.out_path / 'objective_traces.csv',
        report.trace_rows())
    for method in report.methods:
        click.echo(
            f'{method} {report.mean(method):.4f} +- {report.std(method):.4f}')


@cli.command()
@run_options
@click.option(
    '--parameter',
    required=True,
    type=click.Choice(SWEEP_PARAMETERS))
@click.option(
    '--values', 'values_',
    required=True,
    help='Comma separated, e.g. 2,4,6,8,10')
def sweep(
        config_file: Optional[str],
        parameter: str,
        values_: str,
        **flags: Any) -> None:
    """Benchmark once per value of one parameter, the others held fixed."""
    values = [value.strip() for value in values_.split(',') if value.strip()]
    if not values:
        raise ConfigError('no sweep values given')
    overrides = dict(flags)
    if parameter in ('K', 'lambda1'):  # Placeholder, replaced per value
        overrides[parameter.lower()] = overrides.get(parameter.lower()) or 1
    run = build_config(config_file, **overrides)
    result = run_sweep(
        load_data(run),
        run.split(),
        run.params(),
        parameter,
        values,
        run.options())
    csv_storage.write_rows(
        run.out_path / f'sweep_{parameter}.csv',
        result.rows)
    model_storage.write_json(
        run.out_path / f'sweep_{parameter}.json',
        {'parameter': parameter,
         'values': values,
         'rows': result.rows,
         'failures': result.failures})
    for row in result.rows:
        click.echo(
            f"{parameter}={row['value']} {row['method']} {row['mean']:.4f} "
            f"+- {row['std']:.4f}")
    if result.failures:
        for failure in result.failures:
            click.echo(
                f"error={failure['error']} {parameter}={failure['value']} "
                f"message={json.dumps(failure['message'])}",
                err=True)
        click.get_current_context().exit(result.failures[0]['exit'])


@cli.command()
@click.option('--seed', type=int)
@click.option('--out', type=click.Path(file_okay=False))
@click.option('--config', 'config_file', type=click.Path(dir_okay=False))
@click.option('--corrupt-gradient', is_flag=True, hidden=True)
def gradcheck(
        seed: Optional[int],
        out: Optional[str],
        config_file: Optional[str],
        corrupt_gradient: bool) -> None:
    """Finite difference check of the gradient and manifold properties."""
    run = build_config(config_file, model=False, seed=seed, out=out)
    suites = run_gradcheck(int(run['SEED']), corrupt_gradient)
    model_storage.write_json(
        run.out_path / 'gradcheck.json',
        {'seed': run['SEED'], 'suites': [s.to_dict() for s in suites]})
    for suite in suites:
        click.echo(
            f'{suite.name} cases={suite.cases} '
            f'max_error={suite.max_error:.3e} '
            f'passed={str(suite.passed).lower()}')
    check(suites)


@cli.command()
@click.option('--n', 'n', type=int, default=400, show_default=True)
@click.option('--noise-dims', type=int, default=8, show_default=True)
@click.option('--seed', type=int, default=0, show_default=True)
@click.option(
    '--out', 'out_file',
    required=True,
    type=click.Path(dir_okay=False))
def synth(n: int, noise_dims: int, seed: int, out_file: str) -> None:
    """Write the interleaved two class, four mode dataset as CSV."""
    data = make_multimodal(n, noise_dims, seed=seed)
    labels = data.require_labels()
    classes = data.classes or []
    csv_storage.write_rows(out_file, [
        {**{f'f{i}': value for i, value in enumerate(row)},
         'label': classes[label]}
        for row, label in zip(data.features.tolist(), labels.tolist())])
    click.echo(f'data={out_file} samples={data.n} features={data.d}')
