from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np
from sklearn.model_selection import train_test_split

from mdaml import logger
from mdaml.models.dataset import Dataset
from mdaml.models.triplet import IndexArray, TripletSet
from mdaml.resources.error import ConfigError, DataError


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    trials: int = 10
    seed: int = 0
    stratified: bool = True

    def __post_init__(self) -> None:
        if not 0 < self.train_fraction < 1:
            raise ConfigError(
                f'train fraction {self.train_fraction} not in (0, 1)')
        if self.trials < 1:
            raise ConfigError('trials must be >= 1')
        if self.seed < 0:
            raise ConfigError('seed must be unsigned')

    @staticmethod
    def from_config(config: Mapping[str, Any]) -> SplitSpec:
        return SplitSpec(
            train_fraction=float(config['TRAIN_FRACTION']),
            trials=int(config['TRIALS']),
            seed=int(config['SEED']),
            stratified=bool(config['STRATIFIED']))


def stream_seed(seed: int, *stream: int) -> int:
    """Independent 32 bit seed for a (seed, stream ids) combination."""
    return int(np.random.SeedSequence([seed, *stream]).generate_state(1)[0])


def split_indices(
        data: Dataset,
        spec: SplitSpec,
        trial: int) -> tuple[IndexArray, IndexArray]:
    indices = np.arange(data.n)
    stratify = None
    forced: list[int] = []
    if spec.stratified:
        labels = data.require_labels()
        counts = np.bincount(labels)
        for class_ in np.flatnonzero(counts == 1):
            forced.extend(np.flatnonzero(labels == class_).tolist())
            logger.log(
                'warn',
                'split',
                f'class {class_} has a single sample, kept in train')
        indices = np.setdiff1d(indices, forced)
        stratify = labels[indices]
    try:
        train, test = train_test_split(
            indices,
            train_size=spec.train_fraction,
            random_state=stream_seed(spec.seed, trial),
            shuffle=True,
            stratify=stratify)
    except ValueError as e:
        raise DataError(f'split failed: {e}') from e
    return (
        np.sort(np.concatenate([train, np.array(forced, dtype=np.int64)])),
        np.sort(test))


def stratified_split(
        data: Dataset,
        spec: SplitSpec,
        trial: int) -> tuple[Dataset, Dataset]:
    train, test = split_indices(data, spec, trial)
    return data.subset(train), data.subset(test)


def generate_triplets(
        train: Dataset,
        per_anchor_similar: int = 10,
        per_anchor_dissimilar: int = 10,
        seed: int = 0,
        cross_product: bool = False) -> TripletSet:
    if per_anchor_similar < 1 or per_anchor_dissimilar < 1:
        raise ConfigError('triplet counts per anchor must be >= 1')
    labels = train.require_labels()
    rng = np.random.default_rng(seed)
    members = {
        int(class_): np.flatnonzero(labels == class_)
        for class_ in np.unique(labels)}
    triplets: list[tuple[int, int, int]] = []
    skipped = 0
    for i, label in enumerate(labels):
        similar = members[int(label)]
        similar = similar[similar != i]
        dissimilar = np.flatnonzero(labels != label)
        if not similar.size or not dissimilar.size:
            skipped += 1
            continue
        js = rng.choice(
            similar,
            min(per_anchor_similar, similar.size),
            replace=False)
        rs = rng.choice(
            dissimilar,
            min(per_anchor_dissimilar, dissimilar.size),
            replace=False)
        if cross_product:
            triplets.extend((i, int(j), int(r)) for j in js for r in rs)
        else:
            triplets.extend(
                (i, int(j), int(r)) for j, r in zip(js, rs))
    if skipped:
        logger.log(
            'warn',
            'triplets',
            f'{skipped} anchors skipped, no same class partner or no other '
            'class')
    logger.log('debug', 'triplets', f'{len(triplets)} triplets generated')
    return TripletSet(triplets, train.n)
