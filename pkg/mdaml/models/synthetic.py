from __future__ import annotations

import numpy as np

from mdaml.models.dataset import Dataset
from mdaml.resources.error import ConfigError

# Mode positions along the diagonal of the two informative dimensions. The
# classes alternate, so each mode's nearest neighbour mode is of the other
# class while the two modes of a class lie apart.
MODES = [(-2.0, 0), (-1.0, 1), (1.0, 0), (2.0, 1)]


def make_multimodal(
        n: int = 400,
        noise_dims: int = 8,
        separation: float = 1.0,
        mode_std: float = 0.15,
        noise_std: float = 1.0,
        seed: int = 0) -> Dataset:
    """Two classes of two Gaussian modes each, interleaved on a line through
    the two informative dimensions and padded with pure noise dimensions.

    After z-scoring the gap between neighbouring modes is small against the
    noise dimensions, so Euclidean neighbours often come from the wrong
    class although the modes themselves stay well separated."""
    if n < len(MODES):
        raise ConfigError(f'n must be >= {len(MODES)}, got {n}')
    if noise_dims < 0 or separation <= 0 or mode_std <= 0 or noise_std <= 0:
        raise ConfigError('invalid synthetic dataset parameters')
    rng = np.random.default_rng(seed)
    sizes = np.full(len(MODES), n // len(MODES))
    sizes[:n % len(MODES)] += 1
    features = []
    labels = []
    for (position, label), size in zip(MODES, sizes):
        features.append(
            np.hstack([
                separation * position
                + mode_std * rng.standard_normal((size, 2)),
                noise_std * rng.standard_normal((size, noise_dims))]))
        labels.append(np.full(size, label))
    order = rng.permutation(n)
    return Dataset(
        np.vstack(features)[order],
        np.concatenate(labels)[order],
        ['class_0', 'class_1'])
