from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from mdaml import logger
from mdaml.models.spd import Array
from mdaml.resources.error import DataError, ParseError
from mdaml.storage import csv as storage

STD_FLOOR = 1e-12


class Dataset:
    def __init__(
            self,
            features: Any,
            labels: Optional[Any] = None,
            classes: Optional[list[str]] = None) -> None:
        array = np.array(features, dtype=float)
        if array.ndim != 2:
            raise DataError(f'features must be a matrix, got {array.shape}')
        if not np.all(np.isfinite(array)):
            raise DataError('non-finite feature values')
        self.features: Array = array
        self.labels: Optional[NDArray[np.int64]] = None
        self.classes = classes
        if labels is not None:
            label_array = np.array(labels, dtype=np.int64).reshape(-1)
            if label_array.shape[0] != array.shape[0]:
                raise DataError(
                    f'{label_array.shape[0]} labels for {array.shape[0]} '
                    'samples')
            n_classes = len(classes) if classes is not None \
                else int(label_array.max(initial=-1)) + 1
            if np.any(label_array < 0) or np.any(label_array >= n_classes):
                raise DataError(f'labels outside [0, {n_classes})')
            self.labels = label_array

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def d(self) -> int:
        return int(self.features.shape[1])

    @property
    def n_classes(self) -> int:
        if self.labels is None:
            return 0
        if self.classes is not None:
            return len(self.classes)
        return int(self.labels.max(initial=-1)) + 1

    def require_labels(self) -> NDArray[np.int64]:
        if self.labels is None:
            raise DataError('dataset has no labels')
        return self.labels

    def subset(self, indices: Any) -> Dataset:
        return Dataset(
            self.features[indices],
            None if self.labels is None else self.labels[indices],
            self.classes)

    def with_features(self, features: Any) -> Dataset:
        return Dataset(features, self.labels, self.classes)


@dataclass(frozen=True)
class Normalizer:
    mean: Array
    std: Array
    floored: NDArray[np.bool_]

    def apply(self, data: Dataset) -> Dataset:
        if data.d != self.mean.shape[0]:
            raise DataError(
                f'normalizer for {self.mean.shape[0]} features, data has '
                f'{data.d}')
        scaled = (data.features - self.mean) / self.std
        scaled[:, self.floored] = 0.0
        return data.with_features(scaled)

    def inverse(self, features: Array) -> Array:
        return np.asarray(features) * self.std + self.mean

    def to_dict(self) -> dict[str, Any]:
        return {'mean': self.mean.tolist(), 'std': self.std.tolist()}

    @staticmethod
    def from_dict(data: dict[str, Any]) -> Normalizer:
        std = np.array(data['std'], dtype=float)
        return Normalizer(
            np.array(data['mean'], dtype=float),
            std,
            std <= STD_FLOOR)


def fit_normalizer(train: Dataset) -> Normalizer:
    if train.n < 2:
        raise DataError('at least 2 samples are needed to fit a normalizer')
    std = train.features.std(axis=0)  # Population convention
    floored = std < STD_FLOOR
    if floored.any():
        logger.log(
            'notice',
            'data',
            f'{int(floored.sum())} constant features mapped to 0')
    return Normalizer(
        train.features.mean(axis=0),
        np.maximum(std, STD_FLOOR),
        floored)


def _label_index(columns: list[Any], label_column: str | int) -> int:
    if label_column in columns:
        return columns.index(label_column)
    if isinstance(label_column, str) and label_column.lstrip('-').isdigit():
        label_column = int(label_column)
    if isinstance(label_column, int) \
            and -len(columns) <= label_column < len(columns):
        return label_column % len(columns)
    raise ParseError(f'missing label column {label_column}')


def load_csv(
        path: str | Path,
        label_column: Optional[str | int] = -1,
        header: bool = True) -> Dataset:
    try:
        frame = storage.read_table(path, header)
    except FileNotFoundError as e:
        raise DataError(f'file not found: {path}') from e
    except OSError as e:
        raise DataError(f'cannot read {path}: {e.strerror}') from e
    except UnicodeDecodeError as e:
        raise ParseError(f'{path} is not UTF-8 encoded: {e.reason}') from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(' '.join(str(e).split())) from e
    columns = list(frame.columns)
    label_index = None if label_column is None \
        else _label_index(columns, label_column)
    feature_index = [i for i in range(len(columns)) if i != label_index]
    if not feature_index:
        raise ParseError('no feature columns')
    offset = 2 if header else 1  # Line number of the first data row
    features = np.empty((len(frame), len(feature_index)))
    for row_id, row in enumerate(frame.itertuples(index=False)):
        for column, index in enumerate(feature_index):
            value = row[index]
            if not isinstance(value, str) or not value.strip():
                raise ParseError(
                    f'row {row_id + offset}: missing value in column '
                    f'{columns[index]}')
            try:
                number = float(value)
            except ValueError as e:
                raise ParseError(
                    f'row {row_id + offset}: non-numeric feature '
                    f'{value!r}') from e
            if not math.isfinite(number):
                raise ParseError(
                    f'row {row_id + offset}: non-finite feature {value!r}')
            features[row_id, column] = number
    if label_index is None:
        return Dataset(features)
    values = frame.iloc[:, label_index]
    if missing := [
            i + offset for i, v in enumerate(values)
            if not isinstance(v, str) or not v.strip()]:
        raise ParseError(f'row {missing[0]}: missing label')
    labels, classes = pd.factorize(values, sort=False)
    logger.log(
        'info',
        'data',
        f'loaded {path}: {len(frame)} samples, {len(feature_index)} '
        f'features, {len(classes)} classes')
    return Dataset(features, labels, [str(c) for c in classes])
