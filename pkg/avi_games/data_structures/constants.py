"""Numerical defaults and other constants NOT imported from environment variables."""

from avi_games.data_structures.enums import SolverName
from avi_games.data_structures.literal_types import Maneuver

FEASIBILITY_TOL = 1e-8
"""A point ``u`` belongs to ``{Du + d <= 0}`` if ``max(Du + d) <= FEASIBILITY_TOL``.
Kept below the solver tolerance so that membership checks never hide solver error."""

DEFAULT_TOL = 1e-4
DEFAULT_MAX_ITER = 100_000
DEFAULT_SMOOTHING = 1e-6
DEFAULT_ARMIJO_C = 1e-4
DEFAULT_BACKTRACK_BETA = 0.5
DEFAULT_DR_GAMMA = 1.0

MIN_STEP_SIZE = 1e-12
"""Armijo backtracking gives up below this step size (the direction is not a descent one)."""
ARMIJO_SLACK = 1e-28
"""Absolute slack in the Armijo test. Below it merit values are rounding noise."""

SINGULAR_PIVOT_TOL = 1e-14
"""LU pivots smaller than this (relative to the largest one) mark the matrix as singular."""

RIDGE_REGULARIZATION = 1e-10
"""Added to the primal block once if the first LU factorization of a Newton system fails."""

# Inner solve used to project onto a polyhedron (AVI with M = I)
PROJECTION_SMOOTHING = 1e-9
PROJECTION_TOL = 1e-10
PROJECTION_MAX_ITER = 200
PROJECTION_ACCEPT_TOL = 1e-8
"""An inner solve that stops early is still accepted if its KKT norm is below this."""
INFEASIBILITY_MULTIPLIER_NORM = 1e8
"""Multipliers of the projection subproblem above this norm, with a stagnating residual,
mean that the polyhedron is empty."""
STAGNATION_WINDOW = 5

ORACLE_MAX_CONSTRAINTS = 20
"""The active-set oracle enumerates 2**m active sets, so m is kept small."""
ORACLE_TOL = 1e-9

RICCATI_TOL = 1e-10
RICCATI_MAX_ITER = 500
RICCATI_SUBSPACE_MAX_COND = 1e12
"""Largest condition number of the state block of the stable subspace basis."""
PSD_TOL = 1e-10

DEFAULT_HORIZON = 10
DEFAULT_SIM_STEPS = 300
DEFAULT_BUDGET_FOR_STUDY = 10

VIOLATION_TOL = 1e-6
"""Realized constraint values above this are reported as violations."""

NEWTON_SOLVERS = (SolverName.NEWTON, SolverName.FAST_NEWTON)
FIRST_ORDER_SOLVERS = (SolverName.FB, SolverName.DR)

# Scenario defaults. The values are placeholders chosen to give feasible, collision-free runs;
# every one of them can be overridden in a scenario file.
DEFAULT_TAU_S = 0.1
DEFAULT_V_REF = 10.0
DEFAULT_V_BOUNDS = (0.0, 15.0)
DEFAULT_U_BOUNDS = (-3.0, 3.0)
DEFAULT_MIN_GAP = 2.0
DEFAULT_STANDOFF = 5.0
DEFAULT_HEADWAY = 0.5
"""Platooning time headway, seconds. Intersection gaps have no velocity-dependent part."""

DEFAULT_PLATOON_SIZE = 5
PLATOON_STABILIZER_GAIN = 1.0
"""Every platooning agent feeds back the sum of its own two error states with this gain."""

DEFAULT_INTERSECTION_SIZE = 15
INTERSECTION_STABILIZER_GAIN = 0.1
DEFAULT_ARRIVAL_SPACING = 0.8
"""Seconds between consecutive default arrivals."""
DEFAULT_APPROACH_DISTANCE = 20.0
"""Default distance to the conflict zone of a vehicle arriving at time 0, meters."""
DEFAULT_MANEUVER_CYCLE: tuple[Maneuver, ...] = ("NS", "EW", "NW", "WS", "SN", "WE", "ES", "SE")
