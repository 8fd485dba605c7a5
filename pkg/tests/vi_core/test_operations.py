import numpy as np
import pytest

import avi_games.vi_core.operations as operations
from avi_games.data_structures.models import AviProblem, PolyhedralSet
from avi_games.vi_core.exceptions import ViCoreError
from avi_games.vi_core.oracle import active_set_oracle
from avi_games.vi_core.serialization import load_problem
from tests.constants import TEST_DIR
from tests.helpers import random_avi, random_dimensions

PROBLEMS_DIR = TEST_DIR / "vi_core" / "problems_json"


@pytest.mark.parametrize("u, expected", [(1.0, 0.0), (2.0, 1.0), (0.5, 0.5)])
def test_natural_residual_on_halfline(u, expected):
    problem = load_problem(PROBLEMS_DIR / "halfline_at_one.json")
    assert operations.natural_residual(problem, np.array([u])) == pytest.approx(expected, abs=1e-8)


@pytest.mark.parametrize(
    "feasible_set, z, expected",
    [
        (PolyhedralSet.box(-np.ones(2), np.ones(2)), [2.0, 0.3], [1.0, 0.3]),
        (PolyhedralSet.box(-np.ones(2), np.ones(2)), [0.2, -0.7], [0.2, -0.7]),
        (PolyhedralSet(D=np.array([[1.0, 1.0]]), d=np.zeros(1)), [1.0, 1.0], [0.0, 0.0]),
    ],
)
def test_project_polyhedron_examples(feasible_set, z, expected):
    projected = operations.project_polyhedron(feasible_set, np.array(z))
    np.testing.assert_allclose(projected, expected, atol=1e-8)


def test_projection_of_feasible_point_is_identity_without_multipliers():
    feasible_set = PolyhedralSet.box(-np.ones(3), np.ones(3))
    z = np.array([0.5, -0.5, 0.0])
    projected, multipliers = operations.project_with_multipliers(feasible_set, z)
    assert np.array_equal(projected, z)
    assert not multipliers.any()


def test_projection_onto_box_is_clamping():
    rng = np.random.default_rng(7)
    for _ in range(30):
        n = int(rng.integers(1, 7))
        lower = -rng.uniform(0.1, 2.0, n)
        upper = rng.uniform(0.1, 2.0, n)
        z = 3 * rng.standard_normal(n)
        projected = operations.project_polyhedron(PolyhedralSet.box(lower, upper), z)
        np.testing.assert_allclose(projected, np.clip(z, lower, upper), atol=1e-8)


def test_projection_is_nonexpansive():
    rng = np.random.default_rng(11)
    for _ in range(30):
        n, m = random_dimensions(rng)
        feasible_set = random_avi(rng, n, m).feasible_set
        z1, z2 = 3 * rng.standard_normal(n), 3 * rng.standard_normal(n)
        distance = np.linalg.norm(
            operations.project_polyhedron(feasible_set, z1)
            - operations.project_polyhedron(feasible_set, z2)
        )
        assert distance <= np.linalg.norm(z1 - z2) + 1e-8


def test_projection_warm_start_gives_same_point():
    rng = np.random.default_rng(3)
    feasible_set = random_avi(rng, 5, 4).feasible_set
    z = 4 * rng.standard_normal(5)
    cold = operations.project_with_multipliers(feasible_set, z)
    warm = operations.project_with_multipliers(feasible_set, z + 1e-3, warm=cold)
    np.testing.assert_allclose(warm[0], cold[0], atol=1e-2)
    assert feasible_set.is_feasible(warm[0])


def test_projection_onto_empty_set_fails():
    # u <= 0 and u >= 1
    empty = PolyhedralSet(D=np.array([[1.0], [-1.0]]), d=np.array([0.0, 1.0]))
    with pytest.raises(ViCoreError):
        operations.project_polyhedron(empty, np.array([0.5]))


@pytest.mark.parametrize(
    "M, expected",
    [
        (np.eye(3), 1.0),
        (np.array([[1.0, 2.0], [0.0, 1.0]]), 0.0),
        (np.zeros((2, 2)), 0.0),
    ],
)
def test_strong_monotonicity_modulus(M, expected):
    assert operations.strong_monotonicity_modulus(M) == pytest.approx(expected, abs=1e-12)


def test_oracle_solutions_have_zero_natural_residual():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        n, m = random_dimensions(rng)
        problem = random_avi(rng, n, m)
        u, _ = active_set_oracle(problem)
        assert operations.natural_residual(problem, u) <= 1e-8


def test_kkt_violation_reports_each_condition():
    problem = AviProblem.from_arrays(M=[[1.0]], q=[0.0], D=[[-1.0]], d=[1.0])
    violation = operations.kkt_violation(problem, np.array([0.5]), np.array([-0.25]))
    assert violation.stationarity == pytest.approx(0.75)
    assert violation.primal_feasibility == pytest.approx(0.5)
    assert violation.dual_feasibility == pytest.approx(0.25)
    assert violation.complementarity == pytest.approx(0.125)
    assert violation.worst == pytest.approx(0.75)
