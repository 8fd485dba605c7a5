"""Dataclasses shared by all modules: the AVI problem representation and the solver report.

Arrays are stored as float ``numpy`` arrays. The classes are frozen so that instances can be
shared between threads and between receding-horizon steps.
"""

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray

from avi_games.data_structures.constants import FEASIBILITY_TOL
from avi_games.data_structures.enums import SolverStatus

Vector = NDArray[np.float64]
Matrix = NDArray[np.float64]


def as_vector(value: Any, name: str) -> Vector:
    array = np.asarray(value, dtype=float)
    if array.ndim != 1:
        raise ValueError(f"{name} must be a vector, got shape {array.shape}")
    return array


def as_matrix(value: Any, name: str, columns: int | None = None) -> Matrix:
    array = np.asarray(value, dtype=float)
    if array.size == 0 and columns is not None:
        # JSON has no way to tell the width of an empty matrix
        return np.zeros((0, columns))
    if array.ndim != 2:
        raise ValueError(f"{name} must be a matrix, got shape {array.shape}")
    return array


@dataclass(frozen=True, eq=False)
class PolyhedralSet:
    """The set ``{u : Du + d <= 0}`` with ``m`` rows in ``n`` dimensions."""

    D: Matrix
    d: Vector

    def __post_init__(self) -> None:
        D = as_matrix(self.D, "D")
        d = as_vector(self.d, "d")
        if D.shape[0] != d.shape[0]:
            raise ValueError(f"D has {D.shape[0]} rows but d has length {d.shape[0]}")
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "d", d)

    @property
    def m(self) -> int:
        return int(self.D.shape[0])

    @property
    def n(self) -> int:
        return int(self.D.shape[1])

    def values(self, u: Vector) -> Vector:
        """Constraint values ``Du + d`` (nonpositive when feasible)."""
        return self.D @ u + self.d

    def max_violation(self, u: Vector) -> float:
        if self.m == 0:
            return 0.0
        return float(max(np.max(self.values(u)), 0.0))

    def is_feasible(self, u: Vector, tol: float = FEASIBILITY_TOL) -> bool:
        return self.m == 0 or bool(np.max(self.values(u)) <= tol)

    @classmethod
    def box(cls, lower: Vector, upper: Vector) -> "PolyhedralSet":
        """Convenience constructor for ``lower <= u <= upper``."""
        lower, upper = as_vector(lower, "lower"), as_vector(upper, "upper")
        eye = np.eye(lower.shape[0])
        return cls(D=np.vstack([eye, -eye]), d=np.concatenate([-upper, lower]))


@dataclass(frozen=True, eq=False)
class AffineOperator:
    """``F(u) = Mu + q``."""

    M: Matrix
    q: Vector

    def __post_init__(self) -> None:
        M = as_matrix(self.M, "M")
        q = as_vector(self.q, "q")
        if M.shape != (q.shape[0], q.shape[0]):
            raise ValueError(f"M must be {q.shape[0]}x{q.shape[0]}, got {M.shape}")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return int(self.q.shape[0])

    def __call__(self, u: Vector) -> Vector:
        return self.M @ u + self.q


@dataclass(frozen=True, eq=False)
class AviProblem:
    """Find ``u*`` in the set such that ``<Mu* + q, u - u*> >= 0`` for every ``u`` in the set."""

    operator: AffineOperator
    feasible_set: PolyhedralSet

    def __post_init__(self) -> None:
        if self.operator.n != self.feasible_set.n:
            raise ValueError(
                f"Operator dimension {self.operator.n} does not match "
                f"set dimension {self.feasible_set.n}"
            )

    @classmethod
    def from_arrays(cls, M: Any, q: Any, D: Any, d: Any) -> "AviProblem":
        q_vector = as_vector(q, "q")
        return cls(
            operator=AffineOperator(M=as_matrix(M, "M"), q=q_vector),
            feasible_set=PolyhedralSet(D=as_matrix(D, "D", columns=q_vector.shape[0]), d=d),
        )

    @property
    def M(self) -> Matrix:
        return self.operator.M

    @property
    def q(self) -> Vector:
        return self.operator.q

    @property
    def D(self) -> Matrix:
        return self.feasible_set.D

    @property
    def d(self) -> Vector:
        return self.feasible_set.d

    @property
    def n(self) -> int:
        return self.operator.n

    @property
    def m(self) -> int:
        return self.feasible_set.m

    def to_dict(self) -> dict[str, list[Any]]:
        return {
            "M": self.M.tolist(),
            "q": self.q.tolist(),
            "D": self.D.tolist(),
            "d": self.d.tolist(),
        }


@dataclass
class SolverReport:
    """Result of a single solve, with one trace entry per examined iterate."""

    solution: Vector
    multipliers: Vector
    status: SolverStatus
    residual: float
    """Natural residual of ``solution`` (the returned iterate)."""
    elapsed: float = 0.0
    """Wall time of the solve, in seconds."""
    solver: str = ""
    residual_trace: list[float] = field(default_factory=list)
    merit_trace: list[float] = field(default_factory=list)
    kkt_trace: list[float] = field(default_factory=list)
    """Norm of the smoothed KKT map for every iterate (Newton solvers only)."""
    step_sizes: list[float] = field(default_factory=list)
    """Armijo step size accepted at every update (Newton solvers only)."""

    @property
    def iterations(self) -> int:
        return len(self.residual_trace)

    @property
    def converged(self) -> bool:
        return self.status == SolverStatus.CONVERGED

    def to_dict(self) -> dict[str, Any]:
        return {
            "solver": self.solver,
            "status": self.status.value,
            "iterations": self.iterations,
            "residual": self.residual,
            "elapsed_s": self.elapsed,
            "solution": self.solution.tolist(),
            "multipliers": self.multipliers.tolist(),
            "residual_trace": self.residual_trace,
            "merit_trace": self.merit_trace,
            "kkt_trace": self.kkt_trace,
            "step_sizes": self.step_sizes,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SolverReport":
        return cls(
            solution=np.asarray(data["solution"], dtype=float),
            multipliers=np.asarray(data["multipliers"], dtype=float),
            status=SolverStatus(data["status"]),
            residual=float(data["residual"]),
            elapsed=float(data["elapsed_s"]),
            solver=data.get("solver", ""),
            residual_trace=list(data["residual_trace"]),
            merit_trace=list(data["merit_trace"]),
            kkt_trace=list(data.get("kkt_trace", [])),
            step_sizes=list(data.get("step_sizes", [])),
        )
