from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from mdaml import logger
from mdaml.models.anchor import AnchorModel
from mdaml.models.dataset import Dataset
from mdaml.models.mdaml import MdamlParams, MetricProblem
from mdaml.models.protocol import stream_seed
from mdaml.models.spd import (
    Array, SPDMatrix, TangentVector, Transport, parallel_transport,
    project_to_tangent, retract)
from mdaml.models.triplet import TripletSet
from mdaml.resources.error import AcceptanceError, MdamlError

GRADIENT_TOL = 1e-5
RETRACT_TOL = 1e-12
SYMMETRY_TOL = 1e-10
TRANSPORT_TOL = 1e-12
STEP = 1e-6

GRADIENT_CASES = 20
MANIFOLD_CASES = 100


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    max_error: float = 0.0
    tolerance: float = 0.0
    failing_seeds: list[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failing_seeds

    def record(self, error: float, seed: int) -> None:
        self.cases += 1
        self.max_error = max(self.max_error, error)
        if not error < self.tolerance:
            self.failing_seeds.append(seed)

    def to_dict(self) -> dict[str, Any]:
        return {
            'name': self.name,
            'cases': self.cases,
            'max_error': self.max_error,
            'tolerance': self.tolerance,
            'passed': self.passed,
            'failing_seeds': self.failing_seeds}


def random_instance(
        seed: int) -> tuple[SPDMatrix, AnchorModel, Dataset, TripletSet,
                            MdamlParams]:
    """Small random problem with d <= 5, N <= 20, K <= 3 and T <= 15."""
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 6))
    n = int(rng.integers(4, 21))
    k = int(rng.integers(1, 4))
    data = Dataset(rng.standard_normal((n, d)))
    triplets = []
    for _ in range(int(rng.integers(1, 16))):
        i, j, r = rng.choice(n, 3, replace=False)
        triplets.append((int(i), int(j), int(r)))
    anchors = AnchorModel(
        rng.standard_normal((k, d)),
        rng.dirichlet(np.ones(k), n) if k > 1 else np.ones((n, 1)))
    params = MdamlParams(
        K=k,
        lambda1=float(10 ** rng.uniform(-1, 1)),
        lambda2=float(10 ** rng.uniform(-4, -1)),
        eta=float(rng.uniform(1.5, 5.0)),
        seed=seed)
    return (
        SPDMatrix.random(d, rng, 0.2, 3.0),
        anchors,
        data,
        TripletSet(triplets, n),
        params)


def _symmetric_basis(d: int) -> list[Array]:
    basis = []
    for a in range(d):
        for b in range(a, d):
            unit = np.zeros((d, d))
            unit[a, b] = unit[b, a] = 1.0
            basis.append(unit)
    return basis


def gradient_error(
        problem: MetricProblem,
        m: SPDMatrix,
        gradient: Callable[[SPDMatrix], Array]) -> float:
    """Max relative error of directional derivatives against central
    differences over a basis of symmetric perturbations."""
    analytic = []
    numeric = []
    g = np.asarray(gradient(m))
    for direction in _symmetric_basis(m.dim):
        analytic.append(float(np.sum(g * direction)))
        numeric.append(
            (problem.cost(m.data + STEP * direction)
             - problem.cost(m.data - STEP * direction)) / (2 * STEP))
    a, n = np.array(analytic), np.array(numeric)
    scale = max(float(np.linalg.norm(a)), float(np.linalg.norm(n)), 1e-12)
    return float(np.max(np.abs(a - n)) / scale)


def gradient_suite(
        seed: int = 0,
        cases: int = GRADIENT_CASES,
        corrupt: bool = False) -> SuiteResult:
    result = SuiteResult('gradient', tolerance=GRADIENT_TOL)
    for case in range(cases):
        instance_seed = stream_seed(seed, case)
        m, anchors, data, triplets, params = random_instance(instance_seed)
        problem = MetricProblem(anchors, data, triplets, params)
        result.record(
            gradient_error(
                problem,
                m,
                _corrupted(problem.gradient) if corrupt
                else problem.gradient),
            instance_seed)
    return result


def _corrupted(
        gradient: Callable[[SPDMatrix], Array]) \
        -> Callable[[SPDMatrix], Array]:
    def wrong(point: SPDMatrix) -> Array:
        return gradient(point) * 1.01 + 1e-3
    return wrong


def manifold_suite(
        seed: int = 0,
        cases: int = MANIFOLD_CASES) -> list[SuiteResult]:
    retraction = SuiteResult('retract_zero', tolerance=RETRACT_TOL)
    projection = SuiteResult('projection_symmetric', tolerance=SYMMETRY_TOL)
    positive = SuiteResult('retraction_spd', tolerance=1.0)
    transport = SuiteResult('transport_identity', tolerance=TRANSPORT_TOL)
    for case in range(cases):
        instance_seed = stream_seed(seed, case)
        rng = np.random.default_rng(instance_seed)
        d = int(rng.integers(2, 11))
        w = SPDMatrix.random(d, rng)
        retraction.record(
            float(np.max(np.abs(
                retract(w, TangentVector(np.zeros((d, d)), w)).data
                - w.data))),
            instance_seed)
        tangent = project_to_tangent(w, rng.standard_normal((d, d)))
        projection.record(
            float(np.max(np.abs(tangent.data - tangent.data.T))),
            instance_seed)
        try:
            moved = retract(w, tangent)
            smallest = float(np.linalg.eigvalsh(moved.data)[0])
        except MdamlError:
            smallest = 0.0
        positive.record(0.0 if smallest > 0 else 1.0, instance_seed)
        transport.record(
            max(
                float(np.max(np.abs(
                    parallel_transport(tangent, w, w, kind).data
                    - tangent.data)))
                for kind in Transport),
            instance_seed)
    return [retraction, projection, positive, transport]


def run_gradcheck(seed: int = 0, corrupt: bool = False) -> list[SuiteResult]:
    suites = [gradient_suite(seed, corrupt=corrupt), *manifold_suite(seed)]
    for suite in suites:
        logger.log(
            'info' if suite.passed else 'error',
            'gradcheck',
            f'{suite.name}: {suite.cases} cases, max error '
            f'{suite.max_error:.3e}, tolerance {suite.tolerance:.0e}')
    return suites


def check(suites: list[SuiteResult]) -> None:
    for suite in suites:
        if not suite.passed:
            raise AcceptanceError(
                f'{suite.name} failed for seeds '
                f'{", ".join(str(s) for s in suite.failing_seeds)}',
                suite.failing_seeds[0])
