"""Maximal monotone operators represented purely through their resolvents.

A resolvent here is the map v -> (I + beta B)^(-1) v for a maximal monotone
operator B; it is single-valued and firmly nonexpansive, and its fixed points
are exactly the zeros of B. Solvers never touch B itself, only resolvents.

Supported families (each with a closed-form or direct-solve resolvent):
  * the zero operator             -> identity resolvent
  * linear PSD maps x -> M x      -> solve (I + beta M) y = v
  * scaled l1 subdifferentials    -> componentwise soft threshold
  * normal cones of boxes/balls   -> metric projection (beta-independent)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import linalg

LINEAR_PSD = "linear-psd"
PROX_L1 = "prox-l1"
PROJECTION = "projection-onto-set"
ZERO = "zero-operator"


class ConfigurationError(ValueError):
    """A malformed set or operator description."""


@dataclass(frozen=True)
class ResolventOp:
    """A maximal monotone operator given by its resolvent evaluation.

    `evaluate(beta, v)` must be defined for every beta > 0 and every v of the
    operator's dimension, and is expected to be firmly nonexpansive in v for
    fixed beta (checkable with `check_firmly_nonexpansive`).
    """

    dim: int
    kind: str
    evaluate: Callable[[float, np.ndarray], np.ndarray] = field(repr=False)

    def __call__(self, beta: float, v: np.ndarray) -> np.ndarray:
        if beta <= 0.0:
            raise ValueError(f"resolvent: beta must be positive, got {beta}")
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise ValueError(f"resolvent: expected dim {self.dim}, got {v.shape}")
        return self.evaluate(beta, v)


def zero_resolvent(dim: int) -> ResolventOp:
    """Resolvent of the zero operator: the identity map for every beta."""
    return ResolventOp(dim, ZERO, lambda beta, v: v.copy())


def resolvent_linear_psd(M: np.ndarray, beta: float, v: np.ndarray) -> np.ndarray:
    """One-shot resolvent of x -> M x for symmetric PSD M: solve (I + beta M) y = v."""
    M = np.asarray(M, dtype=float)
    if beta <= 0.0:
        raise ValueError(f"resolvent_linear_psd: beta must be positive, got {beta}")
    return linalg.solve_spd(np.eye(M.shape[0]) + beta * M, v)


def linear_psd_resolvent(M: np.ndarray) -> ResolventOp:
    """Resolvent operator for a linear PSD map, caching one Cholesky per beta.

    The cache makes constant-beta iteration cost a single factorization.
    Entries are computed idempotently, so concurrent readers are safe.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ConfigurationError(f"linear_psd_resolvent: expected square matrix, got {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M))))
    if float(np.max(np.abs(M - M.T))) > linalg.SYMMETRY_TOL * scale:
        raise ConfigurationError("linear_psd_resolvent: matrix is not symmetric")
    dim = M.shape[0]
    eye = np.eye(dim)
    factors: dict[float, np.ndarray] = {}

    def evaluate(beta: float, v: np.ndarray) -> np.ndarray:
        factor = factors.get(beta)
        if factor is None:
            factor = linalg.spd_factor(eye + beta * M)
            factors[beta] = factor
        return linalg.solve_spd_factored(factor, v)

    return ResolventOp(dim, LINEAR_PSD, evaluate)


def prox_l1(lam: float, gamma: float, v: np.ndarray) -> np.ndarray:
    """Proximal map of lam * ||.||_1 at scale gamma: soft threshold at gamma*lam."""
    if lam < 0.0:
        raise ValueError(f"prox_l1: lam must be nonnegative, got {lam}")
    if gamma <= 0.0:
        raise ValueError(f"prox_l1: gamma must be positive, got {gamma}")
    v = np.asarray(v, dtype=float)
    t = gamma * lam
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def l1_resolvent(dim: int, lam: float) -> ResolventOp:
    """Resolvent of the subdifferential of lam * ||.||_1."""
    if lam < 0.0:
        raise ValueError(f"l1_resolvent: lam must be nonnegative, got {lam}")
    return ResolventOp(dim, PROX_L1, lambda beta, v: prox_l1(lam, beta, v))


@dataclass(frozen=True)
class Box:
    """Axis-aligned box {x : lo <= x <= hi}; infinite bounds are allowed."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ConfigurationError(f"Box: bound shapes differ, {lo.shape} vs {hi.shape}")
        if np.any(lo > hi):
            raise ConfigurationError("Box: lo > hi in at least one coordinate")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    def project(self, v: np.ndarray) -> np.ndarray:
        return np.clip(v, self.lo, self.hi)


@dataclass(frozen=True)
class Ball:
    """Euclidean ball {x : ||x - center|| <= radius}."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        if center.ndim != 1:
            raise ConfigurationError("Ball: center must be a vector")
        if self.radius < 0.0:
            raise ConfigurationError(f"Ball: negative radius {self.radius}")
        object.__setattr__(self, "center", center)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def project(self, v: np.ndarray) -> np.ndarray:
        d = v - self.center
        nd = np.linalg.norm(d)
        if nd <= self.radius:
            return np.asarray(v, dtype=float).copy()
        return self.center + d * (self.radius / nd)


def resolvent_normal_cone(cset: Box | Ball, beta: float, v: np.ndarray) -> np.ndarray:
    """Resolvent of the normal cone of a box or ball: the metric projection.

    The result is independent of beta (a defining property of normal cones);
    beta is validated but otherwise unused.
    """
    if beta <= 0.0:
        raise ValueError(f"resolvent_normal_cone: beta must be positive, got {beta}")
    return cset.project(np.asarray(v, dtype=float))


def box_resolvent(lo: np.ndarray, hi: np.ndarray) -> ResolventOp:
    box = Box(lo, hi)
    return ResolventOp(box.dim, PROJECTION, lambda beta, v: box.project(v))


def ball_resolvent(center: np.ndarray, radius: float) -> ResolventOp:
    ball = Ball(center, radius)
    return ResolventOp(ball.dim, PROJECTION, lambda beta, v: ball.project(v))


@dataclass(frozen=True)
class FirmNonexpansivenessReport:
    passed: bool
    max_violation: float
    samples: int


def check_firmly_nonexpansive(J: ResolventOp, beta: float, samples: int,
                              seed: int) -> FirmNonexpansivenessReport:
    """Sample-test the firm nonexpansiveness of a resolvent.

    Draws `samples` random pairs (x, y) and evaluates the defect
    ||Jx - Jy||^2 - <Jx - Jy, x - y>, which is nonpositive for a genuine
    resolvent. Passes iff every defect is <= 1e-9 (1 + ||x - y||^2).
    """
    if samples < 1:
        raise ValueError("check_firmly_nonexpansive: samples must be >= 1")
    draws = linalg.normal_draws(seed, 2 * samples * J.dim)
    max_violation = -np.inf
    passed = True
    for i in range(samples):
        x = draws[2 * i * J.dim:(2 * i + 1) * J.dim]
        y = draws[(2 * i + 1) * J.dim:(2 * i + 2) * J.dim]
        d = J(beta, x) - J(beta, y)
        defect = float(d @ d - d @ (x - y))
        max_violation = max(max_violation, defect)
        if defect > 1e-9 * (1.0 + float((x - y) @ (x - y))):
            passed = False
    return FirmNonexpansivenessReport(passed, max_violation, samples)
