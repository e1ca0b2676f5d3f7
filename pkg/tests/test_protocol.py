import numpy as np

from mdaml import config
from mdaml.models.dataset import Dataset
from mdaml.models.protocol import (
    SplitSpec, generate_triplets, split_indices, stratified_split,
    stream_seed)
from mdaml.resources.error import ConfigError, DataError
from tests.base import TestBaseCase


class ProtocolTest(TestBaseCase):

    def test_split(self) -> None:
        data = Dataset(np.arange(20.0).reshape(10, 2), [0] * 5 + [1] * 5)
        spec = SplitSpec(train_fraction=0.7, seed=42)
        train, test = stratified_split(data, spec, 0)
        assert train.n == 7 and test.n == 3
        assert 3 <= int(np.sum(train.labels == 0)) <= 4  # type: ignore
        assert 3 <= int(np.sum(train.labels == 1)) <= 4  # type: ignore

        train_ids, test_ids = split_indices(data, spec, 0)
        assert np.array_equal(
            np.sort(np.concatenate([train_ids, test_ids])),
            np.arange(10))
        again = split_indices(data, spec, 0)
        assert np.array_equal(train_ids, again[0])
        assert np.array_equal(test_ids, again[1])
        assert any(
            not np.array_equal(train_ids, split_indices(data, spec, t)[0])
            for t in range(1, 5))

        data = Dataset(np.arange(30.0).reshape(15, 2), [0] * 10 + [1] * 5)
        for trial in range(5):
            train_ids, test_ids = split_indices(
                data,
                SplitSpec(stratified=False),
                trial)
            assert len(train_ids) + len(test_ids) == 15
            assert not set(train_ids) & set(test_ids)

        # A class with a single sample is forced into train
        config['LOG_LEVEL'] = 4
        data = Dataset(
            np.arange(22.0).reshape(11, 2),
            [0] * 5 + [1] * 5 + [2])
        with self.assertLogs('mdaml', level='WARNING') as logs:
            train_ids, test_ids = split_indices(data, spec, 0)
        assert 'single sample' in logs.output[0]
        assert 10 in train_ids and 10 not in test_ids
        assert len(train_ids) == 8

        with self.assertRaises(DataError):
            split_indices(Dataset([[0.0], [1.0]], [0, 1]), spec, 0)
        with self.assertRaises(DataError):
            split_indices(Dataset([[0.0], [1.0]]), spec, 0)

    def test_split_spec(self) -> None:
        assert SplitSpec.from_config(config) == SplitSpec()
        for options in [
                {'train_fraction': 0.0},
                {'train_fraction': 1.0},
                {'trials': 0},
                {'seed': -1}]:
            with self.assertRaises(ConfigError):
                SplitSpec(**options)  # type: ignore[arg-type]
        assert stream_seed(0, 1) == stream_seed(0, 1)
        assert stream_seed(0, 1) != stream_seed(0, 2)
        assert stream_seed(0, 1, 2) != stream_seed(0, 2, 1)

    def test_generate_triplets(self) -> None:
        labels = [0] * 15 + [1] * 15
        data = Dataset(self.rng.standard_normal((30, 2)), labels)
        triplets = generate_triplets(data, seed=3)
        assert triplets.count == 10 * 30
        for i, j, r in triplets.to_list():
            assert labels[i] == labels[j] and i != j
            assert labels[i] != labels[r]
        first = generate_triplets(data, seed=3)
        assert np.array_equal(first.triplets, triplets.triplets)
        other = generate_triplets(data, seed=4)
        assert not np.array_equal(other.triplets, triplets.triplets)

        crossed = generate_triplets(data, seed=3, cross_product=True)
        assert crossed.count == 100 * 30
        for i in range(30):
            rows = crossed.triplets[crossed.first == i]
            assert len({tuple(row) for row in rows.tolist()}) == 100

        # Three members give two similar partners per anchor
        data = Dataset(
            self.rng.standard_normal((13, 2)),
            [0] * 3 + [1] * 10)
        triplets = generate_triplets(data)
        small = triplets.first < 3
        assert int(np.sum(small)) == 3 * 2
        assert int(np.sum(~small)) == 10 * 3

        triplets = generate_triplets(
            data,
            per_anchor_similar=1,
            per_anchor_dissimilar=2,
            cross_product=True)
        assert triplets.count == 13 * 2

        # Lone classes yield no anchors
        data = Dataset([[0.0], [1.0], [2.0]], [0, 0, 1])
        triplets = generate_triplets(data)
        assert triplets.to_list() == [[0, 1, 2], [1, 0, 2]]
        assert not generate_triplets(Dataset([[0.0], [1.0]], [0, 0])).count
        with self.assertRaises(ConfigError):
            generate_triplets(data, per_anchor_similar=0)
