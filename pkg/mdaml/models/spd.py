from __future__ import annotations

from enum import Enum
from typing import Any, Optional

import numpy as np
from numpy.typing import NDArray
from scipy import linalg

from mdaml.resources.error import (
    DimensionError, IllConditionedError, ManifoldError, NumericError)

Array = NDArray[np.float64]

SYMMETRY_TOL = 1e-12
INPUT_SYMMETRY_TOL = 1e-10
EIGEN_FLOOR = 1e-12  # Relative to the largest eigenvalue


class Transport(str, Enum):
    AIRM = 'airm'
    REPROJECTION = 'reprojection'


def _square(data: Any, name: str = 'matrix') -> Array:
    array = np.array(data, dtype=float)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        raise DimensionError(f'{name} is not square: shape {array.shape}')
    return array


def _is_symmetric(array: Array, tol: float) -> bool:
    scale = max(1.0, float(np.max(np.abs(array)))) if array.size else 1.0
    return bool(np.max(np.abs(array - array.T), initial=0.0) <= tol * scale)


class SPDMatrix:
    """Immutable symmetric positive-definite matrix, checked on creation."""

    def __init__(self, data: Any) -> None:
        array = _square(data, 'SPD matrix')
        if not np.all(np.isfinite(array)):
            raise NumericError('SPD matrix has non-finite entries')
        if not _is_symmetric(array, SYMMETRY_TOL):
            raise ManifoldError('SPD matrix is not symmetric')
        if array.shape[0] and linalg.eigvalsh(array)[0] <= 0:
            raise ManifoldError('SPD matrix is not positive definite')
        array.flags.writeable = False
        self.data = array
        self.dim = array.shape[0]
        self._roots: Optional[tuple[SPDMatrix, SPDMatrix]] = None

    def __repr__(self) -> str:
        return f'SPDMatrix(dim={self.dim})'

    def same_point(self, other: SPDMatrix) -> bool:
        return other is self or (
            other.dim == self.dim and np.array_equal(other.data, self.data))

    @staticmethod
    def identity(dim: int) -> SPDMatrix:
        return SPDMatrix(np.eye(dim))

    @staticmethod
    def random(
            dim: int,
            rng: np.random.Generator,
            low: float = 0.5,
            high: float = 2.0) -> SPDMatrix:
        q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
        return SPDMatrix(sym_part((q * rng.uniform(low, high, dim)) @ q.T))


class TangentVector:
    def __init__(self, data: Any, base_point: SPDMatrix) -> None:
        array = _square(data, 'tangent vector')
        if array.shape[0] != base_point.dim:
            raise DimensionError(
                f'tangent vector of size {array.shape[0]} at a point of '
                f'size {base_point.dim}')
        if not _is_symmetric(array, SYMMETRY_TOL):
            raise ManifoldError('tangent vector is not symmetric')
        array.flags.writeable = False
        self.data = array
        self.base_point = base_point

    def __repr__(self) -> str:
        return f'TangentVector(dim={self.base_point.dim})'

    def scaled(self, factor: float) -> TangentVector:
        return TangentVector(factor * self.data, self.base_point)


def sym_part(a: Any) -> Array:
    array = _square(a)
    return 0.5 * (array + array.T)


def frobenius_inner(a: Array, b: Array) -> float:
    return float(np.sum(a * b))


def tangent_norm(z: TangentVector) -> float:
    return float(np.linalg.norm(z.data))


def project_to_tangent(w: SPDMatrix, g: Any) -> TangentVector:
    """Riemannian gradient W sym(G) W of a Euclidean gradient G."""
    gradient = _square(g, 'gradient')
    if gradient.shape != w.data.shape:
        raise DimensionError(
            f'gradient shape {gradient.shape} at a point of size {w.dim}')
    return TangentVector(sym_part(w.data @ sym_part(gradient) @ w.data), w)


def expm_sym(s: Any) -> SPDMatrix:
    array = _square(s)
    if not _is_symmetric(array, INPUT_SYMMETRY_TOL):
        raise ManifoldError('matrix exponential of an asymmetric matrix')
    values, vectors = linalg.eigh(sym_part(array))
    with np.errstate(over='ignore'):
        exp_values = np.exp(values)
    if not np.all(np.isfinite(exp_values)):
        raise NumericError('matrix exponential overflow')
    return SPDMatrix(sym_part((vectors * exp_values) @ vectors.T))


def logm_spd(w: SPDMatrix) -> Array:
    values, vectors = linalg.eigh(w.data)
    return sym_part((vectors * np.log(values)) @ vectors.T)


def sqrt_and_invsqrt(w: SPDMatrix) -> tuple[SPDMatrix, SPDMatrix]:
    if w._roots is None:  # pylint: disable=protected-access
        values, vectors = linalg.eigh(w.data)
        if values[0] < EIGEN_FLOOR * values[-1]:
            raise IllConditionedError(
                f'eigenvalue {values[0]:.3e} below floor, largest '
                f'{values[-1]:.3e}')
        root = np.sqrt(values)
        w._roots = (  # pylint: disable=protected-access
            SPDMatrix(sym_part((vectors * root) @ vectors.T)),
            SPDMatrix(sym_part((vectors / root) @ vectors.T)))
    return w._roots  # pylint: disable=protected-access


def retract(w: SPDMatrix, z: TangentVector) -> SPDMatrix:
    """Exponential map W^½ expm(W^-½ Z W^-½) W^½."""
    if not z.base_point.same_point(w):
        raise ManifoldError('tangent vector is not based at the given point')
    half, inv_half = sqrt_and_invsqrt(w)
    inner = expm_sym(sym_part(inv_half.data @ z.data @ inv_half.data))
    return SPDMatrix(sym_part(half.data @ inner.data @ half.data))


def parallel_transport(
        z: TangentVector,
        from_: SPDMatrix,
        to: SPDMatrix,
        transport: Transport | str = Transport.REPROJECTION) -> TangentVector:
    if from_.dim != to.dim or z.base_point.dim != from_.dim:
        raise DimensionError(
            f'transport between sizes {from_.dim} and {to.dim}')
    if not z.base_point.same_point(from_):
        raise ManifoldError('tangent vector is not based at the start point')
    if from_.same_point(to):
        return TangentVector(z.data, to)
    if Transport(transport) == Transport.REPROJECTION:
        return TangentVector(sym_part(z.data), to)
    half, inv_half = sqrt_and_invsqrt(from_)
    relative = SPDMatrix(sym_part(inv_half.data @ to.data @ inv_half.data))
    e = half.data @ sqrt_and_invsqrt(relative)[0].data @ inv_half.data
    return TangentVector(sym_part(e @ z.data @ e.T), to)


def airm_distance(a: SPDMatrix, b: SPDMatrix) -> float:
    _, inv_half = sqrt_and_invsqrt(a)
    relative = SPDMatrix(sym_part(inv_half.data @ b.data @ inv_half.data))
    return float(np.linalg.norm(logm_spd(relative)))
