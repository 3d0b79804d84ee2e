"""Dense linear algebra, seeded random sampling, and spectral-norm estimation.

All quantities are finite-dimensional: vectors are 1-d float64 arrays and
linear maps are 2-d float64 arrays. Values are treated as immutable after
construction; every function here is pure.

Random sampling is pinned for reproducibility: a PCG64 uniform stream feeds a
Box-Muller transform, so a single 64-bit seed determines every generated
matrix bit-exactly within this build. The identifier `RNG_ALGORITHM` is
recorded in output files produced by the benchmark layer.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.linalg import lapack

RNG_ALGORITHM = "pcg64-boxmuller"

# fixed internal seed for the power-iteration start vector (any constant works;
# it only has to be deterministic and generic)
_POWER_ITERATION_SEED = 0x9E3779B97F4A7C15

SYMMETRY_TOL = 1e-10


class NotSpdError(Exception):
    """Raised when a matrix fails the symmetric-positive-definite contract.

    `pivot` is the 1-based order of the leading minor that failed during the
    Cholesky factorization, or None when the failure is an asymmetry.
    """

    def __init__(self, message: str, pivot: int | None = None):
        super().__init__(message)
        self.pivot = pivot


def dot(x: np.ndarray, y: np.ndarray) -> float:
    """Inner product of two vectors of equal dimension."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise ValueError(f"dot: dimension mismatch {x.shape} vs {y.shape}")
    return float(x @ y)


def norm(x: np.ndarray) -> float:
    """Euclidean norm, sqrt(dot(x, x))."""
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x))


def apply(M: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Matrix-vector product M @ x with a dimension check."""
    M = np.asarray(M, dtype=float)
    x = np.asarray(x, dtype=float)
    if M.ndim != 2 or x.ndim != 1 or M.shape[1] != x.shape[0]:
        raise ValueError(f"apply: shape mismatch {M.shape} vs {x.shape}")
    return M @ x


def adjoint(M: np.ndarray) -> np.ndarray:
    """Adjoint of a real dense map: the transpose."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("adjoint: expected a 2-d array")
    return M.T


def _check_symmetric(M: np.ndarray) -> None:
    scale = max(1.0, float(np.max(np.abs(M))) if M.size else 0.0)
    asym = float(np.max(np.abs(M - M.T))) if M.size else 0.0
    if asym > SYMMETRY_TOL * scale:
        raise NotSpdError(f"matrix is not symmetric (max asymmetry {asym:.3e})")


def spd_factor(M: np.ndarray) -> np.ndarray:
    """Cholesky factor of a symmetric positive definite matrix.

    Returns the lower-triangular LAPACK factor for use with
    `solve_spd_factored`. Raises NotSpdError naming the failing pivot when M
    is not positive definite, or when M is asymmetric beyond tolerance.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"spd_factor: expected a square matrix, got {M.shape}")
    _check_symmetric(M)
    c, info = lapack.dpotrf(M, lower=1)
    if info > 0:
        raise NotSpdError(
            f"matrix is not positive definite: leading minor of order {info} failed",
            pivot=int(info),
        )
    if info < 0:
        raise ValueError(f"spd_factor: illegal argument {-info} to dpotrf")
    return c


def solve_spd_factored(factor: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve M y = rhs given the lower Cholesky factor of M."""
    rhs = np.asarray(rhs, dtype=float)
    y, info = lapack.dpotrs(factor, rhs, lower=1)
    if info != 0:
        raise ValueError(f"solve_spd_factored: dpotrs failed with info={info}")
    return y


def solve_spd(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve the SPD system M y = rhs by Cholesky factorization.

    The result satisfies ||M y - rhs|| <= 1e-10 (1 + ||rhs||) for reasonably
    conditioned systems; one step of iterative refinement is applied if the
    first pass misses that bound.
    """
    M = np.asarray(M, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if rhs.ndim != 1 or M.shape[0] != rhs.shape[0]:
        raise ValueError(f"solve_spd: shape mismatch {M.shape} vs {rhs.shape}")
    factor = spd_factor(M)
    y = solve_spd_factored(factor, rhs)
    res = rhs - M @ y
    if np.linalg.norm(res) > 1e-10 * (1.0 + np.linalg.norm(rhs)):
        y = y + solve_spd_factored(factor, res)
    return y


class PowerIterationEstimate(NamedTuple):
    value: float
    iterations: int
    converged: bool


def op_norm_sq(M: np.ndarray, tol: float = 1e-10, max_iter: int = 5000) -> PowerIterationEstimate:
    """Estimate ||M||^2 (largest eigenvalue of M* M) by power iteration.

    Deterministic: the start vector comes from a fixed internal seed. The
    returned estimate has seen a relative change <= tol over the last
    iteration, or `converged` is False when `max_iter` was exhausted.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("op_norm_sq: expected a 2-d array")
    if not np.any(M):
        raise ValueError("op_norm_sq: zero matrix has no dominant eigenpair")
    v = normal_draws(_POWER_ITERATION_SEED, M.shape[1])
    v /= np.linalg.norm(v)
    lam_prev = 0.0
    lam = 0.0
    for it in range(1, max_iter + 1):
        w = M.T @ (M @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # start vector happened to lie in the null space; perturb once
            v = normal_draws(_POWER_ITERATION_SEED + 1, M.shape[1])
            v /= np.linalg.norm(v)
            continue
        lam = float(v @ w)
        v = w / nw
        if abs(lam - lam_prev) <= tol * max(1.0, abs(lam)):
            return PowerIterationEstimate(lam, it, True)
        lam_prev = lam
    return PowerIterationEstimate(lam, max_iter, False)


def child_seeds(seed: int, count: int) -> list[int]:
    """Derive `count` independent 64-bit child seeds from a master seed.

    Children 0-2 are consumed by instance generators (one per random matrix)
    and children 3-4 are reserved for the benchmark layer's initial iterates,
    so the same master seed never feeds two different streams.
    """
    ss = np.random.SeedSequence(int(seed))
    return [int(s) for s in ss.generate_state(count, dtype=np.uint64)]


def uniform_stream(seed: int) -> np.random.Generator:
    """The pinned uniform generator underlying all sampling."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def normal_draws(seed: int, count: int) -> np.ndarray:
    """`count` i.i.d. standard normal draws via Box-Muller on the uniform stream."""
    if count < 0:
        raise ValueError("normal_draws: count must be nonnegative")
    rng = uniform_stream(seed)
    pairs = (count + 1) // 2
    # 1 - U keeps the argument of log strictly positive
    u1 = 1.0 - rng.random(pairs)
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([radius * np.cos(2.0 * np.pi * u2),
                        radius * np.sin(2.0 * np.pi * u2)])
    return z[:count]


def gaussian_matrix(rows: int, cols: int, seed: int) -> np.ndarray:
    """Dense (rows x cols) matrix of i.i.d. standard normal entries."""
    if rows < 1 or cols < 1:
        raise ValueError("gaussian_matrix: rows and cols must be >= 1")
    return normal_draws(seed, rows * cols).reshape(rows, cols)


def gaussian_vector(dim: int, seed: int) -> np.ndarray:
    """Standard normal vector of the given dimension."""
    if dim < 1:
        raise ValueError("gaussian_vector: dim must be >= 1")
    return normal_draws(seed, dim)
