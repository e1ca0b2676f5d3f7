from dataclasses import replace

import numpy as np

from mdaml import config, logger
from mdaml.models.benchmark import (
    EUCLID, FIXED, MDAML, EvalOptions, run_benchmark, run_sweep,
    tune_parameters)
from mdaml.models.dataset import Dataset
from mdaml.models.mdaml import MdamlParams
from mdaml.models.protocol import SplitSpec
from mdaml.models.synthetic import make_multimodal
from mdaml.resources.error import ConfigError, DataError
from tests.base import TestBaseCase


class BenchmarkTest(TestBaseCase):

    def test_benchmark(self) -> None:
        data = make_multimodal(n=80, noise_dims=3, seed=1)
        spec = SplitSpec(trials=3, seed=5)
        params = MdamlParams(K=4, lambda1=1.0, outer_max=5)
        options = EvalOptions(workers=1)
        report = run_benchmark(data, spec, params, options)
        assert report.methods == [EUCLID, MDAML]
        assert len(report.trials) == 3
        assert [trial.trial for trial in report.trials] == [0, 1, 2]
        for method in report.methods:
            accuracies = report.accuracies(method)
            assert all(0 <= value <= 1 for value in accuracies)
            assert min(accuracies) <= report.mean(method) <= max(accuracies)
            assert report.std(method) == float(np.std(accuracies))
        for trial in report.trials:
            trace = trial.objective_per_outer[MDAML]
            assert len(trace) == trial.outer_iters[MDAML] + 1
            assert all(
                later <= earlier + 1e-9 * max(1.0, abs(earlier))
                for earlier, later in zip(trace, trace[1:]))

        rows = report.rows()
        assert len(rows) == 3 * 2
        assert set(rows[0]) == {
            'trial', 'method', 'accuracy', 'outer_iters', 'converged'}
        assert rows[0]['method'] == EUCLID and rows[0]['outer_iters'] is None
        assert 'train_seconds' in report.rows(include_timing=True)[0]
        assert len(report.trace_rows()) == sum(
            len(trial.objective_per_outer[MDAML]) for trial in report.trials)
        data_dict = report.to_dict()
        assert 'train_seconds' not in data_dict['trials'][0]
        assert data_dict['params']['K'] == 4
        assert data_dict['summary'][MDAML]['per_trial'] \
            == report.accuracies(MDAML)

        # Trials are independent of the pool size
        parallel = run_benchmark(
            data,
            spec,
            params,
            EvalOptions(workers=2))
        for method in report.methods:
            assert report.accuracies(method) == parallel.accuracies(method)
        for first, second in zip(report.trials, parallel.trials):
            assert first.outer_iters == second.outer_iters
            assert np.allclose(
                first.objective_per_outer[MDAML],
                second.objective_per_outer[MDAML],
                rtol=1e-9)

        report = run_benchmark(
            data,
            SplitSpec(trials=1),
            MdamlParams(K=4, lambda1=1.0, outer_max=3, fixed_weights=True),
            options)
        assert report.methods == [EUCLID, MDAML, FIXED]
        assert len(report.rows()) == 3

        with self.assertRaises(DataError):
            run_benchmark(Dataset(data.features), spec, params, options)

    def test_sweep(self) -> None:
        data = make_multimodal(n=60, noise_dims=2, seed=2)
        spec = SplitSpec(trials=2)
        params = MdamlParams(K=2, lambda1=1.0, outer_max=3)
        options = EvalOptions(workers=1)
        result = run_sweep(data, spec, params, 'eta', [3, 1.0], options)
        assert len(result.reports) == 1
        assert len(result.rows) == 2
        assert {row['method'] for row in result.rows} == {EUCLID, MDAML}
        assert all(row['value'] == 3 for row in result.rows)
        assert len(result.failures) == 1
        failure = result.failures[0]
        assert failure['value'] == 1.0
        assert failure['error'] == 'ConfigError' and failure['exit'] == 2
        assert 'eta' in failure['message']

        result = run_sweep(data, spec, params, 'K', ['2', '2.5'], options)
        assert result.reports[0].params.K == 2
        assert result.failures[0]['error'] == 'ConfigError'

        with self.assertRaises(ConfigError):
            run_sweep(data, spec, params, 'outer_max', [1], options)
        with self.assertRaises(ConfigError):
            run_sweep(data, spec, params, 'eta', [], options)

    def test_tune(self) -> None:
        data = make_multimodal(n=80, noise_dims=2, seed=3)
        spec = SplitSpec(trials=1, seed=1)
        params = MdamlParams(K=1, lambda1=1.0, outer_max=3)
        options = EvalOptions(workers=1)
        tuned, scores = tune_parameters(
            data, spec, params, options, [2, 4, 1000], [1.0, 10.0])
        assert [(s['K'], s['lambda1']) for s in scores] \
            == [(2, 1.0), (2, 10.0), (4, 1.0), (4, 10.0)]
        best = max(score['accuracy'] for score in scores)
        first = next(s for s in scores if s['accuracy'] == best)
        assert (tuned.K, tuned.lambda1) == (first['K'], first['lambda1'])
        assert tuned.eta == params.eta

        report = run_benchmark(
            data,
            SplitSpec(trials=2, seed=1),
            params,
            options,
            ([2, 4], [1.0]))
        assert report.tuning is not None and len(report.tuning) == 2
        assert report.params.K in (2, 4)
        assert EvalOptions.from_config(config) == EvalOptions(workers=1)

    def test_worker_logs(self) -> None:
        previous = logger.state()
        self.addCleanup(logger.restore, previous)
        log_file = self.out_path / 'benchmark.log'
        logger.setup(4, log_file)
        data = make_multimodal(n=40, noise_dims=2, seed=4)
        data = Dataset(
            np.vstack([data.features, [[3.0, 3.0, 0.0, 0.0]]]),
            np.append(data.require_labels(), 2),
            ['class_0', 'class_1', 'class_2'])
        run_benchmark(
            data,
            SplitSpec(trials=2),
            MdamlParams(K=2, lambda1=1.0, outer_max=2),
            EvalOptions(workers=2))
        lines = log_file.read_text(encoding='utf8').splitlines()
        assert len([line for line in lines if 'single sample' in line]) == 2

    def test_multimodal_benchmark(self) -> None:
        data = make_multimodal()
        assert data.n == 400 and data.d == 10
        params = MdamlParams(K=4, lambda1=1000.0, fixed_weights=True)
        report = run_benchmark(
            data,
            SplitSpec(trials=10),
            params,
            EvalOptions(workers=0))
        assert report.mean(MDAML) >= report.mean(EUCLID) + 0.05
        assert report.mean(MDAML) >= report.mean(FIXED)
        assert np.median(
            [trial.outer_iters[MDAML] for trial in report.trials]) <= 5
        for trial in report.trials:
            trace = trial.objective_per_outer[MDAML]
            # Sharp first drop
            assert trace[0] - trace[1] >= 0.5 * (trace[0] - trace[-1])

        result = run_sweep(
            data,
            SplitSpec(trials=10),
            replace(params, fixed_weights=False),
            'eta',
            [3, 5, 7, 10],
            EvalOptions(workers=0))
        assert not result.failures
        means = [row['mean'] for row in result.rows if row['method'] == MDAML]
        assert len(means) == 4
        assert max(means) - min(means) <= 0.02
