from __future__ import annotations

from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.spatial.distance import cdist

from mdaml.models.dataset import Dataset
from mdaml.models.mdaml import transform
from mdaml.models.spd import SPDMatrix
from mdaml.resources.error import ConfigError, DataError, DimensionError

CHUNK_SIZE = 1024  # Queries per distance block


def knn_predict_batch(
        m: SPDMatrix,
        train: Dataset,
        queries: Any,
        k: int = 3) -> NDArray[np.int64]:
    """Majority vote of the k nearest train points under M.

    Distance ties keep the smaller train index first, vote ties go to the
    smallest class id."""
    labels = train.require_labels()
    if k < 1:
        raise ConfigError(f'k must be >= 1, got {k}')
    if k > train.n:
        raise ConfigError(f'k={k} exceeds the {train.n} train samples')
    array = np.atleast_2d(np.asarray(queries, dtype=float))
    if array.shape[1] != train.d:
        raise DimensionError(
            f'queries with {array.shape[1]} features, train has {train.d}')
    n_classes = max(train.n_classes, int(labels.max()) + 1)
    mapped_train = transform(m, train.features)
    predictions = np.empty(array.shape[0], dtype=np.int64)
    for start in range(0, array.shape[0], CHUNK_SIZE):
        block = transform(m, array[start:start + CHUNK_SIZE])
        distances = cdist(block, mapped_train, 'sqeuclidean')
        nearest = np.argsort(distances, axis=1, kind='stable')[:, :k]
        votes = np.zeros((block.shape[0], n_classes), dtype=np.int64)
        np.add.at(
            votes,
            (np.arange(block.shape[0])[:, None], labels[nearest]),
            1)
        predictions[start:start + block.shape[0]] = votes.argmax(axis=1)
    return predictions


def knn_predict(
        m: SPDMatrix,
        train: Dataset,
        query: Any,
        k: int = 3) -> int:
    return int(knn_predict_batch(m, train, [query], k)[0])


def accuracy(predictions: Any, truth: Any) -> float:
    predicted = np.asarray(predictions).reshape(-1)
    expected = np.asarray(truth).reshape(-1)
    if predicted.shape != expected.shape:
        raise DataError(
            f'{predicted.size} predictions for {expected.size} labels')
    if not predicted.size:
        raise DataError('accuracy of an empty prediction set')
    return float(np.count_nonzero(predicted == expected) / predicted.size)


def evaluate(m: SPDMatrix, train: Dataset, test: Dataset, k: int = 3) -> float:
    return accuracy(
        knn_predict_batch(m, train, test.features, k),
        test.require_labels())
