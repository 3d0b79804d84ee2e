"""Metric projections onto half-spaces and half-space intersections.

Every cutting set used by the solvers is a half-space {x : <a, x> <= b} or a
finite intersection of them. Two exact paths and one iterative path exist:

  * `project_halfspace`       closed form,
  * `project_two_halfspaces`  exact case analysis + 2x2 KKT system,
  * `project_polyhedron`      Dykstra's cyclic algorithm (converges to the
                              metric projection, unlike plain cyclic
                              projection), with warm-startable multipliers.

`project_polyhedron_oracle` is an independent exhaustive active-set solver
kept for verification; it never shares code with the Dykstra path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit

PROPER = "proper"
WHOLE = "whole-space"
EMPTY = "empty"

# degenerate-offset policy: a zero normal with b in [-ZERO_B_TOL, 0) is
# roundoff from an exactly-vacuous cut and is treated as b = 0
ZERO_B_TOL = 1e-12
PARALLEL_TOL = 1e-14

DEFAULT_DYKSTRA_TOL = 1e-12
DEFAULT_DYKSTRA_MAX_SWEEPS = 10_000


class InfeasibleSetError(Exception):
    """The requested projection target is provably empty."""


class ProjectionNonConvergence(Exception):
    """Dykstra exhausted its sweep budget.

    Carries the last iterate, its maximum constraint violation, and the sweep
    count for diagnostics.
    """

    def __init__(self, last_point: np.ndarray, max_violation: float, sweeps: int):
        super().__init__(
            f"projection did not converge after {sweeps} sweeps "
            f"(max violation {max_violation:.3e})"
        )
        self.last_point = last_point
        self.max_violation = max_violation
        self.sweeps = sweeps


@dataclass(frozen=True)
class HalfSpace:
    """{x : <a, x> <= b}, tagged at construction when degenerate.

    A zero normal makes the set either the whole space (b >= 0, within the
    roundoff band above) or empty (b < -1e-12).
    """

    a: np.ndarray
    b: float
    kind: str = PROPER

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = float(self.b)
        if a.ndim != 1:
            raise ValueError("HalfSpace: normal must be a vector")
        if np.linalg.norm(a) == 0.0:
            if b >= 0.0:
                kind = WHOLE
            elif b >= -ZERO_B_TOL:
                kind = WHOLE
                b = 0.0
            else:
                kind = EMPTY
        else:
            kind = PROPER
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "kind", kind)

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def violation(self, x: np.ndarray) -> float:
        """<a, x> - b; nonpositive iff x is a member."""
        return float(self.a @ x - self.b)

    def contains(self, x: np.ndarray, slack: float = 0.0) -> bool:
        if self.kind == WHOLE:
            return True
        if self.kind == EMPTY:
            return False
        return self.violation(x) <= slack


def halfspace_from_descent(z: np.ndarray, u: np.ndarray, theta: float) -> HalfSpace:
    """Linear normal form of {x : ||u - x||^2 <= ||z - x||^2 - theta}.

    The quadratic terms cancel, leaving <2(z - u), x> <= ||z||^2 - ||u||^2 - theta,
    so membership in the returned half-space is exactly equivalent to the
    quadratic inequality.
    """
    z = np.asarray(z, dtype=float)
    u = np.asarray(u, dtype=float)
    if z.shape != u.shape:
        raise ValueError(f"halfspace_from_descent: shape mismatch {z.shape} vs {u.shape}")
    if not np.isfinite(theta):
        raise ValueError("halfspace_from_descent: theta must be finite")
    a = 2.0 * (z - u)
    b = float(z @ z - u @ u - theta)
    return HalfSpace(a, b)


def project_halfspace(h: HalfSpace, x: np.ndarray) -> np.ndarray:
    """Metric projection onto a half-space: x itself, or the boundary foot point."""
    x = np.asarray(x, dtype=float)
    if h.kind == EMPTY:
        raise InfeasibleSetError("cannot project onto an empty half-space")
    if h.kind == WHOLE:
        return x.copy()
    v = h.violation(x)
    if v <= 0.0:
        return x.copy()
    return x - (v / float(h.a @ h.a)) * h.a


def _slab_project(unit: np.ndarray, lo: float, hi: float, x: np.ndarray) -> np.ndarray:
    t = float(unit @ x)
    t_clamped = min(max(t, lo), hi)
    return x + (t_clamped - t) * unit


def project_two_halfspaces(h1: HalfSpace, h2: HalfSpace, x: np.ndarray) -> np.ndarray:
    """Exact metric projection onto the intersection of two half-spaces.

    Case analysis: keep x when feasible; accept a single-half-space projection
    when it satisfies the other constraint; otherwise both constraints are
    active and the 2x2 Gram (KKT) system gives the answer. Parallel normals
    (Gram determinant <= 1e-14 ||a1||^2 ||a2||^2) reduce to the tighter
    half-space, or to a slab for antiparallel normals; antiparallel normals
    with incompatible offsets are a provably empty intersection.
    """
    x = np.asarray(x, dtype=float)
    if h1.kind == EMPTY or h2.kind == EMPTY:
        raise InfeasibleSetError("cannot project onto an empty intersection")
    if h1.kind == WHOLE:
        return project_halfspace(h2, x)
    if h2.kind == WHOLE:
        return project_halfspace(h1, x)

    a1, b1, a2, b2 = h1.a, h1.b, h2.a, h2.b
    n1 = float(a1 @ a1)
    n2 = float(a2 @ a2)
    g12 = float(a1 @ a2)
    det = n1 * n2 - g12 * g12

    if det <= PARALLEL_TOL * n1 * n2:
        s1, s2 = np.sqrt(n1), np.sqrt(n2)
        if g12 >= 0.0:
            # same direction: the tighter normalized offset wins
            tighter = h1 if b1 / s1 <= b2 / s2 else h2
            return project_halfspace(tighter, x)
        lo, hi = -b2 / s2, b1 / s1
        if hi - lo < -ZERO_B_TOL:
            raise InfeasibleSetError(
                "antiparallel half-spaces with incompatible offsets"
            )
        if hi < lo:  # within roundoff of empty: collapse to the midpoint plane
            lo = hi = 0.5 * (lo + hi)
        return _slab_project(a1 / s1, lo, hi, x)

    v1 = h1.violation(x)
    v2 = h2.violation(x)
    if v1 <= 0.0 and v2 <= 0.0:
        return x.copy()

    candidates = []
    p1 = project_halfspace(h1, x)
    if h2.violation(p1) <= _feas_tol(h2, p1):
        candidates.append(p1)
    p2 = project_halfspace(h2, x)
    if h1.violation(p2) <= _feas_tol(h1, p2):
        candidates.append(p2)
    if not candidates:
        # both constraints active: solve the Gram system for the multipliers
        l1 = (n2 * v1 - g12 * v2) / det
        l2 = (n1 * v2 - g12 * v1) / det
        candidates.append(x - max(l1, 0.0) * a1 - max(l2, 0.0) * a2)
    dists = [np.linalg.norm(c - x) for c in candidates]
    return candidates[int(np.argmin(dists))]


def _feas_tol(h: HalfSpace, p: np.ndarray) -> float:
    return 1e-11 * (1.0 + abs(h.b) + float(np.linalg.norm(h.a)) * (1.0 + float(np.linalg.norm(p))))


@dataclass(frozen=True)
class Polyhedron:
    """Intersection of half-spaces; persistent (adding returns a new value).

    Whole-space members are dropped on insertion. An empty member, or a pair
    of antiparallel members with incompatible offsets, marks the polyhedron
    infeasible; projections onto an infeasible polyhedron raise.
    """

    dim: int
    halfspaces: tuple[HalfSpace, ...] = ()
    infeasible: bool = False

    @classmethod
    def from_halfspaces(cls, halfspaces, dim: int | None = None) -> "Polyhedron":
        halfspaces = list(halfspaces)
        if dim is None:
            if not halfspaces:
                raise ValueError("Polyhedron: need at least one half-space or an explicit dim")
            dim = halfspaces[0].dim
        poly = cls(dim)
        for h in halfspaces:
            poly = poly.add(h)
        return poly

    def add(self, h: HalfSpace) -> "Polyhedron":
        if h.dim != self.dim:
            raise ValueError(f"Polyhedron.add: dimension mismatch {h.dim} vs {self.dim}")
        if self.infeasible or h.kind == EMPTY:
            return Polyhedron(self.dim, self.halfspaces, True)
        if h.kind == WHOLE:
            return self
        nh = float(h.a @ h.a)
        sh = np.sqrt(nh)
        for g in self.halfspaces:
            ng = float(g.a @ g.a)
            dot = float(g.a @ h.a)
            parallel = ng * nh - dot * dot <= PARALLEL_TOL * ng * nh
            if parallel and dot < 0.0 and g.b / np.sqrt(ng) + h.b / sh < -ZERO_B_TOL:
                return Polyhedron(self.dim, self.halfspaces + (h,), True)
        return Polyhedron(self.dim, self.halfspaces + (h,), False)

    def max_violation(self, x: np.ndarray) -> float:
        """Largest <a_i, x> - b_i over members (-inf when unconstrained)."""
        if not self.halfspaces:
            return -np.inf
        A = np.stack([h.a for h in self.halfspaces])
        b = np.array([h.b for h in self.halfspaces])
        return float(np.max(A @ x - b))


class DykstraProjection(NamedTuple):
    point: np.ndarray
    sweeps: int
    multipliers: np.ndarray


@njit(cache=True)
def _dykstra_sweeps(A, b, nrm2, lam, y, tol, max_sweeps):  # pragma: no cover - jitted
    k, m = A.shape
    yprev = np.empty(m)
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        for j in range(m):
            yprev[j] = y[j]
        for i in range(k):
            d = 0.0
            for j in range(m):
                d += A[i, j] * y[j]
            lam_new = lam[i] + (d - b[i]) / nrm2[i]
            if lam_new < 0.0:
                lam_new = 0.0
            step = lam_new - lam[i]
            if step != 0.0:
                for j in range(m):
                    y[j] -= step * A[i, j]
                lam[i] = lam_new
        dy = 0.0
        for j in range(m):
            dy += (y[j] - yprev[j]) ** 2
        if dy <= tol * tol:
            maxviol = -np.inf
            for i in range(k):
                d = 0.0
                for j in range(m):
                    d += A[i, j] * y[j]
                if d - b[i] > maxviol:
                    maxviol = d - b[i]
            if maxviol <= tol:
                return sweeps
    return -sweeps


def project_polyhedron(P: Polyhedron, x: np.ndarray, tol: float = DEFAULT_DYKSTRA_TOL,
                       max_sweeps: int = DEFAULT_DYKSTRA_MAX_SWEEPS,
                       warm_start: np.ndarray | None = None) -> DykstraProjection:
    """Dykstra's cyclic projection of x onto the polyhedron.

    For half-spaces each Dykstra correction is a nonnegative multiple of the
    constraint normal, so the correction coefficients are exactly the dual
    variables of the least-distance problem; `warm_start` reuses multipliers
    from an earlier projection against a prefix of the same half-space list,
    which is what the shrinking-set solvers do across iterations.

    Returns the projected point, the sweep count, and the multipliers. The
    point satisfies max violation <= tol and moved less than tol over the
    final sweep; exceeding `max_sweeps` raises ProjectionNonConvergence.
    """
    if P.infeasible:
        raise InfeasibleSetError("polyhedron is marked infeasible")
    if tol <= 0.0:
        raise ValueError("project_polyhedron: tol must be positive")
    x = np.asarray(x, dtype=float)
    k = len(P.halfspaces)
    if k == 0:
        return DykstraProjection(x.copy(), 0, np.zeros(0))
    A = np.stack([h.a for h in P.halfspaces])
    b = np.array([h.b for h in P.halfspaces])
    nrm2 = np.einsum("ij,ij->i", A, A)
    lam = np.zeros(k)
    if warm_start is not None:
        w = np.asarray(warm_start, dtype=float)
        if w.shape[0] > k or np.any(w < 0.0):
            raise ValueError("project_polyhedron: invalid warm start multipliers")
        lam[: w.shape[0]] = w
    y = x - A.T @ lam
    sweeps = int(_dykstra_sweeps(A, b, nrm2, lam, y, tol, max_sweeps))
    if sweeps < 0:
        raise ProjectionNonConvergence(y, float(np.max(A @ y - b)), -sweeps)
    return DykstraProjection(y, sweeps, lam)


ORACLE_MAX_HALFSPACES = 12
ORACLE_MAX_DIM = 16


def project_polyhedron_oracle(P: Polyhedron, x: np.ndarray) -> np.ndarray:
    """Exhaustive active-set projection, independent of the Dykstra path.

    Enumerates every subset of constraints as a candidate active set, solves
    the equality-constrained least-distance system via least squares, and
    returns the feasible candidate closest to x. Exponential in the number of
    half-spaces; capped at 12 half-spaces and dimension 16.
    """
    if P.infeasible:
        raise InfeasibleSetError("polyhedron is marked infeasible")
    k = len(P.halfspaces)
    if k > ORACLE_MAX_HALFSPACES or P.dim > ORACLE_MAX_DIM:
        raise ValueError("project_polyhedron_oracle: problem exceeds enumeration budget")
    x = np.asarray(x, dtype=float)
    if k == 0:
        return x.copy()
    A = np.stack([h.a for h in P.halfspaces])
    b = np.array([h.b for h in P.halfspaces])

    def feasible(y: np.ndarray) -> bool:
        scale = 1.0 + np.abs(b) + np.linalg.norm(A, axis=1) * (1.0 + float(np.linalg.norm(y)))
        return bool(np.all(A @ y - b <= 1e-10 * scale))

    best = None
    best_dist = np.inf
    if feasible(x):
        best, best_dist = x.copy(), 0.0
    for mask in range(1, 2 ** k):
        idx = [i for i in range(k) if mask >> i & 1]
        As = A[idx]
        # projection onto the affine hull of the active constraints:
        # y = x - As^T mu with As y = b_s  =>  (As As^T) mu = As x - b_s
        gram = As @ As.T
        rhs = As @ x - b[idx]
        mu, *_ = np.linalg.lstsq(gram, rhs, rcond=None)
        y = x - As.T @ mu
        d = float(np.linalg.norm(y - x))
        if d < best_dist and feasible(y):
            best, best_dist = y, d
    if best is None:
        raise InfeasibleSetError("oracle found no feasible candidate")
    return best
