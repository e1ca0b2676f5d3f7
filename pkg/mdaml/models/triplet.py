from __future__ import annotations

from typing import Any, Optional

import numpy as np
from numpy.typing import NDArray

from mdaml.resources.error import DataError

IndexArray = NDArray[np.int64]


class TripletSet:
    """Constraints (i, j, r): sample i is more similar to j than to r."""

    def __init__(self, triplets: Any, n_samples: Optional[int] = None) -> None:
        array = np.array(triplets, dtype=np.int64).reshape(-1, 3)
        if np.any(array < 0):
            raise DataError('negative sample index in triplets')
        if n_samples is not None and np.any(array >= n_samples):
            raise DataError(f'triplet index out of range for {n_samples}')
        bad = np.flatnonzero(
            (array[:, 0] == array[:, 1]) | (array[:, 0] == array[:, 2]))
        if bad.size:
            raise DataError(f'degenerate triplet at position {bad[0]}')
        array.flags.writeable = False
        self.triplets = array

    def __len__(self) -> int:
        return self.count

    @property
    def count(self) -> int:
        return int(self.triplets.shape[0])

    @property
    def first(self) -> IndexArray:
        return self.triplets[:, 0]

    @property
    def second(self) -> IndexArray:
        return self.triplets[:, 1]

    @property
    def third(self) -> IndexArray:
        return self.triplets[:, 2]

    def check(self, n_samples: int) -> None:
        if self.count and int(self.triplets.max()) >= n_samples:
            raise DataError(f'triplet index out of range for {n_samples}')

    def similar_pairs(self) -> IndexArray:
        return self.triplets[:, [0, 1]]

    def dissimilar_pairs(self) -> IndexArray:
        return self.triplets[:, [0, 2]]

    def to_list(self) -> list[list[int]]:
        return self.triplets.tolist()
