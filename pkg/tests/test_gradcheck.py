from mdaml.models.gradcheck import (
    GRADIENT_TOL, SuiteResult, check, gradient_suite, manifold_suite,
    random_instance, run_gradcheck)
from mdaml.resources.error import AcceptanceError
from tests.base import TestBaseCase


class GradcheckTest(TestBaseCase):

    def test_suites(self) -> None:
        suites = run_gradcheck(seed=0)
        assert [suite.name for suite in suites] == [
            'gradient',
            'retract_zero',
            'projection_symmetric',
            'retraction_spd',
            'transport_identity']
        assert all(suite.passed for suite in suites)
        assert suites[0].cases == 20
        assert all(suite.cases == 100 for suite in suites[1:])
        assert suites[0].max_error < GRADIENT_TOL
        check(suites)

        m, anchors, data, triplets, params = random_instance(11)
        assert m.dim == data.d <= 5
        assert data.n <= 20 and anchors.k == params.K <= 3
        assert 1 <= triplets.count <= 15

    def test_failures(self) -> None:
        corrupt = gradient_suite(seed=1, cases=5, corrupt=True)
        assert not corrupt.passed
        assert len(corrupt.failing_seeds) == 5
        with self.assertRaises(AcceptanceError) as context:
            check([*manifold_suite(seed=1, cases=3), corrupt])
        assert context.exception.seed == corrupt.failing_seeds[0]
        assert context.exception.exit_code == 5

        suite = SuiteResult('case', tolerance=1e-3)
        suite.record(1e-4, 7)
        suite.record(1e-3, 8)
        assert suite.to_dict() == {
            'name': 'case',
            'cases': 2,
            'max_error': 1e-3,
            'tolerance': 1e-3,
            'passed': False,
            'failing_seeds': [8]}
