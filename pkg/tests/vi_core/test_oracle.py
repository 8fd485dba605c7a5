import numpy as np
import pytest

from avi_games.data_structures.models import AviProblem
from avi_games.vi_core.exceptions import NoFeasibleCandidate
from avi_games.vi_core.operations import kkt_violation
from avi_games.vi_core.oracle import active_set_oracle
from avi_games.vi_core.serialization import load_problem
from tests.constants import TEST_DIR
from tests.helpers import random_avi, random_dimensions

PROBLEMS_DIR = TEST_DIR / "vi_core" / "problems_json"


@pytest.mark.parametrize(
    "file_stem, expected_u, expected_lam",
    [
        ("halfline_at_one", [1.0], [1.0]),
        ("halfline_interior", [0.0], [0.0]),
        ("single_halfspace", [1.0, 0.0], [1.0]),
    ],
)
def test_active_set_oracle_examples(file_stem, expected_u, expected_lam):
    u, lam = active_set_oracle(load_problem(PROBLEMS_DIR / f"{file_stem}.json"))
    np.testing.assert_allclose(u, expected_u, atol=1e-12)
    np.testing.assert_allclose(lam, expected_lam, atol=1e-12)


def test_active_set_oracle_without_constraints():
    u, lam = active_set_oracle(load_problem(PROBLEMS_DIR / "unconstrained.json"))
    np.testing.assert_allclose(u, [1.0, -1.0])
    assert lam.shape == (0,)


def test_oracle_output_satisfies_kkt_conditions():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n, m = random_dimensions(rng)
        problem = random_avi(rng, n, m)
        u, lam = active_set_oracle(problem)
        assert kkt_violation(problem, u, lam).worst <= 1e-8


def test_oracle_rejects_empty_set():
    problem = AviProblem.from_arrays(M=[[1.0]], q=[0.0], D=[[1.0], [-1.0]], d=[0.0, 1.0])
    with pytest.raises(NoFeasibleCandidate):
        active_set_oracle(problem)


def test_oracle_refuses_large_constraint_counts():
    problem = AviProblem.from_arrays(M=[[1.0]], q=[0.0], D=-np.ones((21, 1)), d=np.zeros(21))
    with pytest.raises(ValueError):
        active_set_oracle(problem)
