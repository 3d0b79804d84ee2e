"""Iterative solvers for the split variational inclusion problem.

Problem: find x* with 0 in B1(x*) and 0 in B2(A x*), where B1, B2 enter only
through their resolvents and A is a dense linear map.

Six algorithms share one stepping core (inertial extrapolation, self-adaptive
stepsize, resolvent step):

  * run_alg31_hybrid              cut + anchor half-spaces, exact projection
  * run_alg32_shrinking_anchor    growing cut collection, project the anchor
  * run_alg33_shrinking_previous  growing cut collection, project the iterate
  * run_byrne_halpern             anchored baseline, fixed stepsize
  * run_long_viscosity            contraction-driven baseline with inertia
  * run_anh_mann                  convex-combination baseline with inertia

The self-adaptive stepsize needs no knowledge of ||A||; the three baselines
use a fixed stepsize validated against a power-iteration estimate of ||A*A||.

Every run returns a RunResult whose records hold the full per-iteration
state; with `verify=True` the descent inequality, the sign of the cut margin,
and membership of the known solution in every constructed set are checked
each iteration and violations raise InvariantViolation.

A single run is strictly sequential (each iterate depends on the previous
one); distinct runs share no mutable state and may execute concurrently.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from . import linalg
from .operators import ResolventOp
from .projections import (
    PROPER,
    HalfSpace,
    InfeasibleSetError,
    Polyhedron,
    ProjectionNonConvergence,
    halfspace_from_descent,
    project_polyhedron,
    project_two_halfspaces,
)

TOLERANCE_MET = "tolerance-met"
MAX_ITER = "max-iter"
INFEASIBLE_SET = "infeasible-set"
NUMERICAL_FAILURE = "numerical-failure"

SequenceRule = Union[float, Callable[[int], float]]


class InvariantViolation(Exception):
    """A runtime invariant monitor failed (verification mode only)."""


@dataclass(frozen=True)
class SvipProblem:
    """A split variational inclusion instance.

    J1 and J2 are the resolvents of the two maximal monotone operators; A maps
    the first space into the second. `known_solution` (when the generator can
    certify one) enables the error-to-solution stopping rule.
    """

    J1: ResolventOp
    J2: ResolventOp
    A: np.ndarray
    known_solution: Optional[np.ndarray] = None

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2:
            raise ValueError("SvipProblem: A must be a matrix")
        if self.J1.dim != A.shape[1] or self.J2.dim != A.shape[0]:
            raise ValueError(
                f"SvipProblem: inconsistent dims, J1={self.J1.dim}, "
                f"J2={self.J2.dim}, A={A.shape}"
            )
        object.__setattr__(self, "A", A)
        if self.known_solution is not None:
            xs = np.asarray(self.known_solution, dtype=float)
            if xs.shape != (A.shape[1],):
                raise ValueError("SvipProblem: known_solution has wrong dimension")
            object.__setattr__(self, "known_solution", xs)

    @property
    def dim1(self) -> int:
        return self.A.shape[1]

    @property
    def dim2(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class SolverParams:
    """Shared iteration parameters.

    alpha/beta/sigma accept either a constant or a callable n -> value;
    constants are validated here, callables at each resolution. sigma must lie
    in (0, 2) and beta must be positive. The projection knobs apply to the
    shrinking-set algorithms only: the sweep budget is deliberately larger
    than the projection routine's own default because late iterations of the
    anchored variant legitimately need tens of thousands of sweeps at the
    1e-12 projection tolerance.
    """

    alpha: SequenceRule = 0.5
    beta: SequenceRule = 1.0
    sigma: SequenceRule = 1.5
    max_iter: int = 300
    epsilon: float = 1e-5
    denom_guard: float = 1e-14
    projection_tol: float = 1e-12
    projection_max_sweeps: int = 100_000

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("SolverParams: max_iter must be >= 1")
        if self.epsilon < 0.0:
            raise ValueError("SolverParams: epsilon must be nonnegative")
        if self.denom_guard <= 0.0:
            raise ValueError("SolverParams: denom_guard must be positive")
        for name, lo, hi in (("alpha", None, None), ("beta", 0.0, None), ("sigma", 0.0, 2.0)):
            rule = getattr(self, name)
            if not callable(rule):
                _window(float(rule), name, lo, hi)

    def alpha_at(self, n: int) -> float:
        return _window(_at(self.alpha, n), "alpha", None, None)

    def beta_at(self, n: int) -> float:
        return _window(_at(self.beta, n), "beta", 0.0, None)

    def sigma_at(self, n: int) -> float:
        return _window(_at(self.sigma, n), "sigma", 0.0, 2.0)


def _at(rule: SequenceRule, n: int) -> float:
    return float(rule(n)) if callable(rule) else float(rule)


def _window(v: float, name: str, lo: Optional[float], hi: Optional[float],
            lo_closed: bool = False, hi_closed: bool = False) -> float:
    if not np.isfinite(v):
        raise ValueError(f"{name} must be finite, got {v}")
    if lo is not None and (v < lo if lo_closed else v <= lo):
        raise ValueError(f"{name}={v} below its window")
    if hi is not None and (v > hi if hi_closed else v >= hi):
        raise ValueError(f"{name}={v} above its window")
    return v


@dataclass(frozen=True)
class IterationRecord:
    """Per-iteration state snapshot.

    `x` is the measured iterate x_n; `z`, `u`, `gamma`, `theta` describe the
    step taken from it. The terminal record of a run takes no step: there
    z == u == x and gamma == theta == 0.
    """

    n: int
    x: np.ndarray
    z: np.ndarray
    u: np.ndarray
    gamma: float
    theta: float
    error_to_solution: Optional[float]
    residual: float
    elapsed: float
    projection_sweeps: Optional[int] = None


@dataclass(frozen=True)
class RunResult:
    records: list[IterationRecord]
    termination: str
    final_x: np.ndarray
    failure: Optional[str] = None

    @property
    def iterations(self) -> int:
        return self.records[-1].n


def inertial_extrapolate(x: np.ndarray, x_prev: np.ndarray, alpha: float) -> np.ndarray:
    """Momentum step x + alpha (x - x_prev)."""
    x = np.asarray(x, dtype=float)
    x_prev = np.asarray(x_prev, dtype=float)
    if x.shape != x_prev.shape:
        raise ValueError("inertial_extrapolate: shape mismatch")
    return x + alpha * (x - x_prev)


def adaptive_stepsize(A: np.ndarray, J2: ResolventOp, beta: float, sigma: float,
                      z: np.ndarray, guard: float = 1e-14):
    """Self-adaptive stepsize from the current residual norms.

    Computes r = (I - J2)(A z) and s = A* r and returns
    (sigma ||r||^2 / ||s||^2, r, s). When A z is already (numerically) a zero
    of the second operator, or when s vanishes while r does not, the stepsize
    degenerates to 0; the guard absorbs both cases, so no division can fail.
    """
    Az = A @ z
    r = Az - J2(beta, Az)
    s = A.T @ r
    nr2 = float(r @ r)
    ns2 = float(s @ s)
    if np.sqrt(nr2) <= guard * (1.0 + float(np.linalg.norm(Az))) or ns2 <= guard:
        return 0.0, r, s
    return sigma * nr2 / ns2, r, s


def descent_theta(gamma: float, r: np.ndarray, s: np.ndarray) -> float:
    """Cut margin gamma (2 ||r||^2 - gamma ||s||^2).

    With gamma from the adaptive rule this equals
    sigma (2 - sigma) ||r||^4 / ||s||^2 >= 0.
    """
    return gamma * (2.0 * float(r @ r) - gamma * float(s @ s))


def svip_step_core(problem: SvipProblem, beta: float, sigma: float, z: np.ndarray,
                   guard: float = 1e-14):
    """The inner step shared by all algorithms: u = J1(z - gamma A* r).

    Returns (u, gamma, theta, r, s); the baselines reuse the same resolvent
    step with their own fixed gamma instead.
    """
    gamma, r, s = adaptive_stepsize(problem.A, problem.J2, beta, sigma, z, guard)
    u = problem.J1(beta, z - gamma * s)
    return u, gamma, descent_theta(gamma, r, s), r, s


def residual(problem: SvipProblem, x: np.ndarray, beta: float) -> float:
    """Fixed-point residual ||x - J1 x|| + ||(I - J2)(A x)||; zero exactly on solutions."""
    if beta <= 0.0:
        raise ValueError("residual: beta must be positive")
    x = np.asarray(x, dtype=float)
    Ax = problem.A @ x
    return float(np.linalg.norm(x - problem.J1(beta, x))
                 + np.linalg.norm(Ax - problem.J2(beta, Ax)))


def _measure(problem: SvipProblem, x: np.ndarray, beta: float):
    err = None
    if problem.known_solution is not None:
        err = float(np.linalg.norm(x - problem.known_solution))
    res = residual(problem, x, beta)
    return err, res


def _terminal(n, x, err, res) -> IterationRecord:
    return IterationRecord(n, x.copy(), x.copy(), x.copy(), 0.0, 0.0, err, res, 0.0)


def _stopped(err: Optional[float], res: float, epsilon: float) -> bool:
    value = err if err is not None else res
    return value < epsilon


def _verify_descent(n: int, z, u, th: float, xstar) -> None:
    if th < -1e-12:
        raise InvariantViolation(f"n={n}: cut margin {th:.3e} below -1e-12")
    if xstar is not None:
        lhs = float(np.linalg.norm(u - xstar) ** 2)
        rhs = float(np.linalg.norm(z - xstar) ** 2)
        if lhs > rhs - th + 1e-9 * (1.0 + rhs):
            raise InvariantViolation(
                f"n={n}: descent inequality violated by {lhs - (rhs - th):.3e}"
            )


def _verify_membership(n: int, label: str, slack_needed: float) -> None:
    if slack_needed > 1e-9:
        raise InvariantViolation(
            f"n={n}: known solution violates {label} by {slack_needed:.3e}"
        )


def run_alg31_hybrid(problem: SvipProblem, params: SolverParams, x0: np.ndarray,
                     x1: np.ndarray, verify: bool = False) -> RunResult:
    """Hybrid projection: x_{n+1} projects the anchor x1 onto C_n intersect Q_n.

    C_n is the descent cut from the current step and Q_n = {x : <x_n - x1,
    x_n - x> <= 0}; both are half-spaces, so the projection is exact. Q_1 is
    the whole space. A provably empty intersection terminates the run with
    the infeasible-set tag.
    """
    x_prev, x, anchor = _start(problem, x0, x1)
    records: list[IterationRecord] = []
    for n in range(1, params.max_iter + 1):
        beta_n = params.beta_at(n)
        err, res = _measure(problem, x, beta_n)
        if _stopped(err, res, params.epsilon) or n == params.max_iter:
            records.append(_terminal(n, x, err, res))
            tag = TOLERANCE_MET if _stopped(err, res, params.epsilon) else MAX_ITER
            return RunResult(records, tag, x)
        t0 = time.perf_counter()
        z = inertial_extrapolate(x, x_prev, params.alpha_at(n))
        u, gamma, th, r, s = svip_step_core(problem, beta_n, params.sigma_at(n),
                                            z, params.denom_guard)
        cut = halfspace_from_descent(z, u, th)
        a_q = anchor - x
        q = HalfSpace(a_q, float(a_q @ x))
        try:
            x_next = project_two_halfspaces(cut, q, anchor)
        except InfeasibleSetError as exc:
            elapsed = time.perf_counter() - t0
            records.append(IterationRecord(n, x.copy(), z, u, gamma, th, err, res, elapsed))
            return RunResult(records, INFEASIBLE_SET, x, failure=str(exc))
        elapsed = time.perf_counter() - t0
        if verify:
            xs = problem.known_solution
            _verify_descent(n, z, u, th, xs)
            if xs is not None:
                if cut.kind == PROPER:
                    _verify_membership(n, "C_n", cut.violation(xs))
                if q.kind == PROPER:
                    _verify_membership(n, "Q_n", q.violation(xs))
        records.append(IterationRecord(n, x.copy(), z, u, gamma, th, err, res, elapsed))
        x_prev, x = x, x_next
    raise AssertionError("unreachable")


def _run_shrinking(problem: SvipProblem, params: SolverParams, x0: np.ndarray,
                   x1: np.ndarray, project_previous: bool, verify: bool) -> RunResult:
    x_prev, x, anchor = _start(problem, x0, x1)
    poly = Polyhedron(problem.dim1)
    multipliers = np.zeros(0)
    records: list[IterationRecord] = []
    for n in range(1, params.max_iter + 1):
        beta_n = params.beta_at(n)
        err, res = _measure(problem, x, beta_n)
        if _stopped(err, res, params.epsilon) or n == params.max_iter:
            records.append(_terminal(n, x, err, res))
            tag = TOLERANCE_MET if _stopped(err, res, params.epsilon) else MAX_ITER
            return RunResult(records, tag, x)
        t0 = time.perf_counter()
        z = inertial_extrapolate(x, x_prev, params.alpha_at(n))
        u, gamma, th, r, s = svip_step_core(problem, beta_n, params.sigma_at(n),
                                            z, params.denom_guard)
        poly = poly.add(halfspace_from_descent(z, u, th))
        if poly.infeasible:
            elapsed = time.perf_counter() - t0
            records.append(IterationRecord(n, x.copy(), z, u, gamma, th, err, res, elapsed))
            return RunResult(records, INFEASIBLE_SET, x,
                             failure="shrinking set became provably empty")
        point = x if project_previous else anchor
        try:
            proj = project_polyhedron(poly, point, tol=params.projection_tol,
                                      max_sweeps=params.projection_max_sweeps,
                                      warm_start=multipliers)
        except ProjectionNonConvergence as exc:
            elapsed = time.perf_counter() - t0
            records.append(IterationRecord(n, x.copy(), z, u, gamma, th, err, res, elapsed))
            return RunResult(records, NUMERICAL_FAILURE, x, failure=str(exc))
        elapsed = time.perf_counter() - t0
        multipliers = proj.multipliers
        if verify:
            xs = problem.known_solution
            _verify_descent(n, z, u, th, xs)
            if xs is not None:
                _verify_membership(n, "C_{n+1}", poly.max_violation(xs))
        records.append(IterationRecord(n, x.copy(), z, u, gamma, th, err, res,
                                       elapsed, projection_sweeps=proj.sweeps))
        x_prev, x = x, proj.point
    raise AssertionError("unreachable")


def run_alg32_shrinking_anchor(problem: SvipProblem, params: SolverParams,
                               x0: np.ndarray, x1: np.ndarray,
                               verify: bool = False) -> RunResult:
    """Shrinking projection of the fixed anchor x1 onto the growing cut set.

    C_{n+1} intersects C_n with the new descent cut (C_1 is the whole space);
    each iterate is the exact projection of x1, computed by warm-started
    Dykstra sweeps.
    """
    return _run_shrinking(problem, params, x0, x1, project_previous=False, verify=verify)


def run_alg33_shrinking_previous(problem: SvipProblem, params: SolverParams,
                                 x0: np.ndarray, x1: np.ndarray,
                                 verify: bool = False) -> RunResult:
    """Shrinking projection of the previous iterate onto the growing cut set.

    Identical sets to the anchored variant, but x_{n+1} projects x_n. If x_n
    already satisfies every cut the iterate is a fixed point of the step.
    """
    return _run_shrinking(problem, params, x0, x1, project_previous=True, verify=verify)


def _fixed_stepsize(problem: SvipProblem, gamma: Optional[float], factor: float,
                    upper_factor: float) -> float:
    """Fixed stepsize factor / ||A*A||, validated against (0, upper_factor / ||A*A||)."""
    est = linalg.op_norm_sq(problem.A)
    bound = upper_factor / est.value
    if gamma is None:
        gamma = factor / est.value
    if not 0.0 < gamma < bound:
        raise ValueError(
            f"fixed stepsize {gamma} outside (0, {bound:.6g}) from the operator-norm bound"
        )
    return gamma


def run_byrne_halpern(problem: SvipProblem, params: SolverParams, x1: np.ndarray,
                      delta: Optional[SequenceRule] = None,
                      gamma: Optional[float] = None,
                      verify: bool = False) -> RunResult:
    """Anchored baseline: x_{n+1} = delta_n x1 + (1 - delta_n) J1(x_n - gamma A* r_n).

    No inertia and no projection; gamma defaults to 1.5 / ||A*A|| and must lie
    in (0, 2 / ||A*A||). delta_n defaults to 1 / (n + 1).
    """
    if delta is None:
        delta = lambda n: 1.0 / (n + 1)
    gamma = _fixed_stepsize(problem, gamma, 1.5, 2.0)
    _, x, anchor = _start(problem, x1, x1)
    records: list[IterationRecord] = []
    for n in range(1, params.max_iter + 1):
        beta_n = params.beta_at(n)
        err, res = _measure(problem, x, beta_n)
        if _stopped(err, res, params.epsilon) or n == params.max_iter:
            records.append(_terminal(n, x, err, res))
            tag = TOLERANCE_MET if _stopped(err, res, params.epsilon) else MAX_ITER
            return RunResult(records, tag, x)
        d_n = _window(_at(delta, n), "delta", 0.0, 1.0, hi_closed=True)
        t0 = time.perf_counter()
        Ax = problem.A @ x
        rvec = Ax - problem.J2(beta_n, Ax)
        u = problem.J1(beta_n, x - gamma * (problem.A.T @ rvec))
        x_next = d_n * anchor + (1.0 - d_n) * u
        elapsed = time.perf_counter() - t0
        records.append(IterationRecord(n, x.copy(), x.copy(), u, gamma, 0.0,
                                       err, res, elapsed))
        x = x_next
    raise AssertionError("unreachable")


def _vanishing_inertia(n: int, dx: float, cap: float) -> float:
    # the 1/(n+1)^3 decay enforces the vanishing-inertia limit condition;
    # at numerical stationarity the condition is vacuous
    if dx <= 1e-14:
        return 0.0
    return min(cap, 1.0 / ((n + 1) ** 3 * dx))


def run_long_viscosity(problem: SvipProblem, params: SolverParams, x0: np.ndarray,
                       x1: np.ndarray, delta: Optional[SequenceRule] = None,
                       f: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                       contraction: float = 0.8, alpha_cap: float = 0.5,
                       gamma: Optional[float] = None,
                       verify: bool = False) -> RunResult:
    """Viscosity baseline: x_{n+1} = delta_n f(x_n) + (1 - delta_n) u_n.

    f is a contraction with recorded coefficient `contraction` in [0, 1)
    (default 0.8 x). gamma defaults to 0.5 / ||A*A|| and must stay below
    1 / ||A||^2; the inertial weight vanishes like 1 / (n+1)^3.
    """
    if not 0.0 <= contraction < 1.0:
        raise ValueError(f"contraction coefficient {contraction} outside [0, 1)")
    if f is None:
        f = lambda v: contraction * v
    if delta is None:
        delta = lambda n: 1.0 / (n + 1)
    gamma = _fixed_stepsize(problem, gamma, 0.5, 1.0)
    x_prev, x, _ = _start(problem, x0, x1)
    records: list[IterationRecord] = []
    for n in range(1, params.max_iter + 1):
        beta_n = params.beta_at(n)
        err, res = _measure(problem, x, beta_n)
        if _stopped(err, res, params.epsilon) or n == params.max_iter:
            records.append(_terminal(n, x, err, res))
            tag = TOLERANCE_MET if _stopped(err, res, params.epsilon) else MAX_ITER
            return RunResult(records, tag, x)
        d_n = _window(_at(delta, n), "delta", 0.0, 1.0)
        t0 = time.perf_counter()
        a_n = _vanishing_inertia(n, float(np.linalg.norm(x - x_prev)), alpha_cap)
        z = inertial_extrapolate(x, x_prev, a_n)
        Az = problem.A @ z
        rvec = Az - problem.J2(beta_n, Az)
        u = problem.J1(beta_n, z - gamma * (problem.A.T @ rvec))
        x_next = d_n * f(x) + (1.0 - d_n) * u
        elapsed = time.perf_counter() - t0
        records.append(IterationRecord(n, x.copy(), z, u, gamma, 0.0, err, res, elapsed))
        x_prev, x = x, x_next
    raise AssertionError("unreachable")


def run_anh_mann(problem: SvipProblem, params: SolverParams, x0: np.ndarray,
                 x1: np.ndarray, theta_rule: Optional[SequenceRule] = None,
                 delta: Optional[SequenceRule] = None, alpha_cap: float = 0.5,
                 gamma: Optional[float] = None, verify: bool = False) -> RunResult:
    """Mann-type baseline: x_{n+1} = (1 - delta_n - theta_n) x_n + delta_n u_n.

    theta_n defaults to 1 / (n + 1) and delta_n to 0.2 (1 - theta_n); the
    window 0 < delta_n < 1 - theta_n is asserted every iteration. The recorded
    theta column carries this scheme's own theta_n.
    """
    if theta_rule is None:
        theta_rule = lambda n: 1.0 / (n + 1)
    gamma = _fixed_stepsize(problem, gamma, 0.5, 1.0)
    x_prev, x, _ = _start(problem, x0, x1)
    records: list[IterationRecord] = []
    for n in range(1, params.max_iter + 1):
        beta_n = params.beta_at(n)
        err, res = _measure(problem, x, beta_n)
        if _stopped(err, res, params.epsilon) or n == params.max_iter:
            records.append(_terminal(n, x, err, res))
            tag = TOLERANCE_MET if _stopped(err, res, params.epsilon) else MAX_ITER
            return RunResult(records, tag, x)
        th_n = _window(_at(theta_rule, n), "theta", 0.0, 1.0)
        d_n = _at(delta, n) if delta is not None else 0.2 * (1.0 - th_n)
        if not 0.0 < d_n < 1.0 - th_n:
            raise ValueError(f"n={n}: delta={d_n} outside (0, 1 - theta) window")
        t0 = time.perf_counter()
        a_n = _vanishing_inertia(n, float(np.linalg.norm(x - x_prev)), alpha_cap)
        z = inertial_extrapolate(x, x_prev, a_n)
        Az = problem.A @ z
        rvec = Az - problem.J2(beta_n, Az)
        u = problem.J1(beta_n, z - gamma * (problem.A.T @ rvec))
        x_next = (1.0 - d_n - th_n) * x + d_n * u
        elapsed = time.perf_counter() - t0
        records.append(IterationRecord(n, x.copy(), z, u, gamma, th_n, err, res, elapsed))
        x_prev, x = x, x_next
    raise AssertionError("unreachable")


def _start(problem: SvipProblem, x0: np.ndarray, x1: np.ndarray):
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    if x0.shape != (problem.dim1,) or x1.shape != (problem.dim1,):
        raise ValueError("initial points have the wrong dimension")
    return x0.copy(), x1.copy(), x1.copy()
