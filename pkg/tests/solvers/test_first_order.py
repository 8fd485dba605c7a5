import numpy as np
import pytest

import avi_games.solvers.first_order as first_order
from avi_games.data_structures.enums import SolverStatus
from avi_games.data_structures.models import AviProblem, PolyhedralSet
from avi_games.solvers.models import FirstOrderConfig, NewtonConfig, OperatorCache
from avi_games.solvers.newton import solve
from avi_games.vi_core.oracle import active_set_oracle
from tests.helpers import random_avi, random_dimensions

HALFLINE = AviProblem.from_arrays(M=[[1.0]], q=[0.0], D=[[-1.0]], d=[1.0])


def test_fb_with_unit_step_projects_in_one_step():
    feasible_set = PolyhedralSet.box(-np.ones(3), np.ones(3))
    z = np.array([2.0, -0.5, -3.0])
    problem = AviProblem.from_arrays(M=np.eye(3), q=-z, D=feasible_set.D, d=feasible_set.d)
    report = first_order.fb_solve(
        problem, FirstOrderConfig(fb_step=1.0, tol=1e-7), warm=(np.array([0.3, 0.1, 0.9]), None)
    )
    assert report.converged
    assert report.iterations == 2
    np.testing.assert_allclose(report.solution, [1.0, -0.5, -1.0], atol=1e-8)


def test_fb_on_halfline_from_five():
    report = first_order.fb_solve(
        HALFLINE, FirstOrderConfig(fb_step=1.0), warm=(np.array([5.0]), None)
    )
    assert report.residual_trace == pytest.approx([4.0, 0.0], abs=1e-8)
    assert report.solution[0] == pytest.approx(1.0, abs=1e-8)
    assert not report.multipliers.any()


def test_dr_on_halfline_follows_hand_iteration():
    report = first_order.dr_solve(HALFLINE, FirstOrderConfig(dr_gamma=1.0, max_iter=5, tol=1e-12))
    # J(z) = z / 2 and z_k = 2 - 2**(1 - k), so the residual 1 - J(z_k) halves every step
    expected = [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125]
    assert report.residual_trace == pytest.approx(expected, abs=1e-8)
    assert report.status == SolverStatus.MAX_ITERATIONS
    assert report.solution[0] == pytest.approx(0.96875, abs=1e-8)


def test_dr_fixed_point_is_left_unchanged():
    # u* = 1 with z* = u* + F(u*) = 2 for gamma = 1, the inner projection is exact to ~1e-11
    report = first_order.dr_solve(
        HALFLINE, FirstOrderConfig(max_iter=3, tol=1e-9), warm=(np.array([1.0]), None)
    )
    assert report.converged
    assert report.iterations == 1


def test_resolvent_solves_shifted_system():
    rng = np.random.default_rng(8)
    problem = random_avi(rng, 6, 3)
    cache = OperatorCache(problem.M)
    for gamma in (0.5, 1.0, 2.0):
        z = rng.standard_normal(6)
        x = first_order.resolvent(cache, gamma, problem.q, z)
        np.testing.assert_allclose(
            (np.eye(6) + gamma * problem.M) @ x, z - gamma * problem.q, atol=1e-10
        )


def test_default_fb_step_is_half_the_stability_bound():
    M = np.array([[2.0, 1.0], [-1.0, 2.0]])
    cache = OperatorCache(M)
    assert cache.modulus == pytest.approx(2.0)
    assert cache.default_fb_step() == pytest.approx(2.0 / 5.0)


def test_fb_is_a_contraction_with_default_step():
    rng = np.random.default_rng(9)
    problem = random_avi(rng, 4, 3, well_conditioned=True)
    u_star, _ = active_set_oracle(problem)
    one_step = FirstOrderConfig(max_iter=1, tol=1e-14)
    u = 5 * rng.standard_normal(4)
    distances = [np.linalg.norm(u - u_star)]
    for _ in range(10):
        u = first_order.fb_solve(problem, one_step, warm=(u, None)).solution
        distances.append(np.linalg.norm(u - u_star))
    ratios = [after / before for before, after in zip(distances, distances[1:]) if before > 1e-9]
    assert max(ratios) < 1.0


@pytest.mark.parametrize("solve_function", [first_order.fb_solve, first_order.dr_solve])
def test_first_order_solutions_match_oracle(solve_function):
    rng = np.random.default_rng(17)
    config = FirstOrderConfig(tol=1e-6, max_iter=5_000)
    for _ in range(25):
        n, m = random_dimensions(rng, max_n=5, max_m=4)
        problem = random_avi(rng, n, m, well_conditioned=True)
        u_star, _ = active_set_oracle(problem)
        report = solve_function(problem, config)
        assert report.converged
        np.testing.assert_allclose(report.solution, u_star, atol=1e-3)


def test_all_solvers_agree():
    rng = np.random.default_rng(23)
    tol = 1e-6
    for _ in range(10):
        problem = random_avi(rng, 4, 3, well_conditioned=True)
        solutions = [
            solve(problem, NewtonConfig(tol=tol)).solution,
            first_order.fb_solve(problem, FirstOrderConfig(tol=tol)).solution,
            first_order.dr_solve(problem, FirstOrderConfig(tol=tol)).solution,
        ]
        for other in solutions[1:]:
            np.testing.assert_allclose(other, solutions[0], atol=1e-4)


def test_dr_multipliers_approach_kkt_multipliers():
    problem = random_avi(np.random.default_rng(29), 4, 3, well_conditioned=True)
    _, lam_star = active_set_oracle(problem)
    report = first_order.dr_solve(problem, FirstOrderConfig(tol=1e-9))
    np.testing.assert_allclose(report.multipliers, lam_star, atol=1e-5)


def test_budget_returns_last_iterate():
    problem = random_avi(np.random.default_rng(31), 5, 4)
    report = first_order.fb_solve(problem, FirstOrderConfig(iteration_budget=3, tol=1e-12))
    assert report.status == SolverStatus.BUDGET_EXHAUSTED
    assert report.iterations == 4
    assert report.solution.shape == (5,)
