"""Random problem generators shared by the tests. Every generator takes a seeded ``Generator``."""

import numpy as np

from avi_games.data_structures.models import AviProblem
from avi_games.games.models import ConstraintSpec, LqGame, RiccatiSolution


def random_monotone_matrix(rng: np.random.Generator, n: int, modulus: float = 0.5) -> np.ndarray:
    """Nonsymmetric matrix whose symmetric part has smallest eigenvalue exactly ``modulus``."""
    matrix = rng.random((n, n))
    smallest = np.linalg.eigvalsh((matrix + matrix.T) / 2).min()
    return matrix + (modulus - smallest) * np.eye(n)


def well_conditioned_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    """Identity plus a mild skew part and a small PSD part: modulus >= 1, norm below 2."""
    skew = rng.standard_normal((n, n)) / np.sqrt(n)
    psd = rng.standard_normal((n, n)) / np.sqrt(n)
    return np.eye(n) + 0.25 * (skew - skew.T) + 0.1 * psd @ psd.T


def random_avi(
    rng: np.random.Generator,
    n: int,
    m: int,
    modulus: float = 0.5,
    well_conditioned: bool = False,
) -> AviProblem:
    """Strongly monotone AVI whose polyhedron contains a known point with positive slack."""
    M = well_conditioned_matrix(rng, n) if well_conditioned else random_monotone_matrix(
        rng, n, modulus
    )
    D = rng.standard_normal((m, n))
    interior_point = rng.standard_normal(n)
    d = -D @ interior_point - rng.uniform(0.1, 1.0, m)
    q = 3 * rng.standard_normal(n)
    return AviProblem.from_arrays(M=M, q=q, D=D, d=d)


def random_dimensions(rng: np.random.Generator, max_n: int = 8, max_m: int = 6) -> tuple[int, int]:
    return int(rng.integers(1, max_n + 1)), int(rng.integers(1, max_m + 1))


def random_game(
    rng: np.random.Generator,
    n: int,
    input_dims: tuple[int, ...],
    radius: float = 0.8,
    input_bound: float | None = None,
) -> LqGame:
    """Game with a Schur-stable ``A`` of spectral radius ``radius``, ``Q_i = I``, ``R_i = I``."""
    A = rng.standard_normal((n, n))
    A *= radius / np.abs(np.linalg.eigvals(A)).max()
    if input_bound is None:
        constraints = ConstraintSpec.unconstrained(n, input_dims)
    else:
        constraints = ConstraintSpec.from_bounds(n, input_dims, -input_bound, input_bound)
    return LqGame(
        A=A,
        B=tuple(rng.standard_normal((n, dim)) for dim in input_dims),
        Q=tuple(np.eye(n) for _ in input_dims),
        R=tuple(np.eye(dim) for dim in input_dims),
        constraints=constraints,
    )


def fixed_terminal_riccati(game: LqGame, terminal: list[np.ndarray]) -> RiccatiSolution:
    """Riccati data with prescribed terminal costs, for tests that only need the stacking."""
    n = game.n
    return RiccatiSolution(
        P=tuple(np.eye(n) for _ in game.B),
        K=tuple(np.zeros((dim, n)) for dim in game.input_dims),
        A_cl=game.A,
        P_hat=tuple(np.zeros((2 * n, 2 * n)) for _ in game.B),
        K_hat=tuple(np.zeros((dim, 2 * n)) for dim in game.input_dims),
        terminal_cost=tuple(terminal),
    )
