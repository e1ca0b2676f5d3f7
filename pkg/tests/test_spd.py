import math

import numpy as np

from mdaml.models.spd import (
    SPDMatrix, TangentVector, Transport, airm_distance, expm_sym,
    frobenius_inner, logm_spd, parallel_transport, project_to_tangent,
    retract, sqrt_and_invsqrt, sym_part, tangent_norm)
from mdaml.resources.error import DimensionError, ManifoldError
from tests.base import TestBaseCase


class SpdTest(TestBaseCase):

    def test_matrix_functions(self) -> None:
        assert np.array_equal(
            sym_part([[0, 1], [0, 0]]),
            [[0, 0.5], [0.5, 0]])
        assert np.array_equal(sym_part([[1, 2], [4, 3]]), [[1, 3], [3, 3]])
        symmetric = [[2.0, -1.0], [-1.0, 5.0]]
        assert np.array_equal(sym_part(symmetric), symmetric)
        with self.assertRaises(DimensionError):
            sym_part([[1, 2, 3], [4, 5, 6]])

        assert np.allclose(expm_sym(np.zeros((3, 3))).data, np.eye(3))
        assert np.allclose(
            expm_sym(np.diag([1.0, -2.0])).data,
            np.diag([math.e, math.exp(-2)]))
        t = 0.7
        assert np.allclose(
            expm_sym([[0, t], [t, 0]]).data,
            [[math.cosh(t), math.sinh(t)], [math.sinh(t), math.cosh(t)]],
            atol=1e-14)
        with self.assertRaises(ManifoldError):
            expm_sym([[0, 1], [0, 0]])

        w = SPDMatrix.random(4, self.rng)
        half, inv_half = sqrt_and_invsqrt(w)
        assert np.allclose(half.data @ half.data, w.data, atol=1e-12)
        assert np.allclose(half.data @ inv_half.data, np.eye(4), atol=1e-12)
        s = sym_part(self.rng.standard_normal((4, 4)))
        assert np.allclose(logm_spd(expm_sym(s)), s, atol=1e-10)

        assert frobenius_inner(np.eye(2), np.full((2, 2), 3.0)) == 6.0
        assert tangent_norm(TangentVector(np.eye(4), w)) == 2.0

    def test_types(self) -> None:
        with self.assertRaises(ManifoldError):
            SPDMatrix([[1.0, 2.0], [2.0, 1.0]])  # Eigenvalue -1
        with self.assertRaises(ManifoldError):
            SPDMatrix([[1.0, 0.1], [0.0, 1.0]])
        with self.assertRaises(DimensionError):
            SPDMatrix([1.0, 2.0])
        w = SPDMatrix.identity(3)
        with self.assertRaises(ValueError):
            w.data[0, 0] = 5.0  # Read only
        with self.assertRaises(DimensionError):
            TangentVector(np.eye(2), w)
        with self.assertRaises(ManifoldError):
            TangentVector([[0, 1, 0], [0, 0, 0], [0, 0, 0]], w)
        assert w.same_point(SPDMatrix(np.eye(3)))
        assert not w.same_point(SPDMatrix(2 * np.eye(3)))

    def test_projection(self) -> None:
        g = self.rng.standard_normal((3, 3))
        assert np.allclose(
            project_to_tangent(SPDMatrix.identity(3), g).data,
            sym_part(g))
        assert np.allclose(
            project_to_tangent(
                SPDMatrix(np.diag([2.0, 1.0])),
                [[0, 1], [0, 0]]).data,
            [[0, 1], [1, 0]])
        assert not project_to_tangent(
            SPDMatrix.identity(2),
            np.zeros((2, 2))).data.any()
        with self.assertRaises(DimensionError):
            project_to_tangent(SPDMatrix.identity(2), np.zeros((3, 3)))

    def test_retraction(self) -> None:
        for dim in range(2, 11):
            w = SPDMatrix.random(dim, self.rng)
            zero = TangentVector(np.zeros((dim, dim)), w)
            assert np.max(np.abs(retract(w, zero).data - w.data)) <= 1e-12
            z = project_to_tangent(w, self.rng.standard_normal((dim, dim)))
            moved = retract(w, z)
            assert np.linalg.eigvalsh(moved.data)[0] > 0
            assert np.allclose(moved.data, moved.data.T, atol=1e-12)

        # At the identity the retraction is the plain matrix exponential
        s = sym_part(self.rng.standard_normal((3, 3)))
        identity = SPDMatrix.identity(3)
        assert np.allclose(
            retract(identity, TangentVector(s, identity)).data,
            expm_sym(s).data)
        with self.assertRaises(ManifoldError):
            retract(SPDMatrix(2 * np.eye(3)), TangentVector(s, identity))

    def test_transport(self) -> None:
        for dim in range(2, 11):
            w = SPDMatrix.random(dim, self.rng)
            z = project_to_tangent(w, self.rng.standard_normal((dim, dim)))
            for transport in Transport:
                moved = parallel_transport(z, w, w, transport)
                assert np.max(np.abs(moved.data - z.data)) <= 1e-12
                assert moved.base_point is w

        a = SPDMatrix.random(3, self.rng)
        b = SPDMatrix.random(3, self.rng)
        z = project_to_tangent(a, self.rng.standard_normal((3, 3)))
        reprojected = parallel_transport(z, a, b)
        assert np.allclose(reprojected.data, z.data)
        assert reprojected.base_point is b
        moved = parallel_transport(z, a, b, 'airm')
        assert np.allclose(moved.data, moved.data.T, atol=1e-12)

        # AIRM transport keeps the affine invariant norm
        def norm(point: SPDMatrix, vector: TangentVector) -> float:
            inv_half = sqrt_and_invsqrt(point)[1].data
            return float(np.linalg.norm(inv_half @ vector.data @ inv_half))

        assert math.isclose(norm(a, z), norm(b, moved), rel_tol=1e-9)

        with self.assertRaises(ManifoldError):
            parallel_transport(z, b, a)
        with self.assertRaises(DimensionError):
            parallel_transport(z, a, SPDMatrix.identity(4))

    def test_airm_distance(self) -> None:
        identity = SPDMatrix.identity(4)
        assert airm_distance(identity, identity) == 0.0
        assert math.isclose(
            airm_distance(identity, SPDMatrix(math.e ** 2 * np.eye(4))),
            4.0)
        a = SPDMatrix.random(3, self.rng)
        b = SPDMatrix.random(3, self.rng)
        assert math.isclose(
            airm_distance(a, b),
            airm_distance(b, a),
            rel_tol=1e-9)
