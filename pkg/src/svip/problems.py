"""Problem-instance generators and their regeneration recipes.

Each generator is pure: the same dimensions and seed reproduce the instance
bit-exactly. Instances are serialized as recipes (kind + dimensions + seed +
parameters), never as matrices; `from_recipe` regenerates the matrices from
the pinned sampling scheme.

Seed layout (see linalg.child_seeds): children 0-2 feed the instance's random
matrices, children 3-4 are reserved for the benchmark layer's initial
iterates, so instance data and starting points never share a stream.
"""

from __future__ import annotations

import json

import numpy as np

from . import linalg
from .operators import (
    Box,
    ball_resolvent,
    box_resolvent,
    l1_resolvent,
    linear_psd_resolvent,
)
from .solvers import SvipProblem


def gen_example51(m: int, seed: int) -> SvipProblem:
    """Random dense instance: both operators are x -> (G* G) x for Gaussian G.

    Draws three independent m x m standard-normal matrices; the first is the
    coupling map A, the other two define the linear PSD operators whose
    resolvents are direct solves. The zero vector is the minimum-norm
    solution, so the error-to-solution stopping rule applies.
    """
    if m < 1:
        raise ValueError("gen_example51: m must be >= 1")
    kids = linalg.child_seeds(seed, 3)
    A = linalg.gaussian_matrix(m, m, kids[0])
    A1 = linalg.gaussian_matrix(m, m, kids[1])
    A2 = linalg.gaussian_matrix(m, m, kids[2])
    return SvipProblem(
        J1=linear_psd_resolvent(A1.T @ A1),
        J2=linear_psd_resolvent(A2.T @ A2),
        A=A,
        known_solution=np.zeros(m),
    )


def gen_split_minimization(m1: int, m2: int, lam: float, seed: int,
                           box: Box | None = None) -> SvipProblem:
    """l1-regularized split minimization: minimize lam ||x||_1 subject to
    A x landing in a box.

    The first resolvent is the soft threshold, the second the box projection.
    By default the box is random but always contains the origin, so the zero
    vector is a known solution (it minimizes lam ||.||_1 and A 0 = 0 lies in
    the box). Pass an explicit `box` to override the random one.
    """
    if lam < 0.0:
        raise ValueError("gen_split_minimization: lam must be nonnegative")
    kids = linalg.child_seeds(seed, 2)
    A = linalg.gaussian_matrix(m2, m1, kids[0])
    if box is None:
        widths = np.abs(linalg.normal_draws(kids[1], 2 * m2))
        box = Box(-(0.5 + widths[:m2]), 0.5 + widths[m2:])
    if box.dim != m2:
        raise ValueError("gen_split_minimization: box dimension must equal m2")
    return SvipProblem(
        J1=l1_resolvent(m1, lam),
        J2=box_resolvent(box.lo, box.hi),
        A=A,
        known_solution=np.zeros(m1),
    )


def gen_split_feasibility(m1: int, m2: int, seed: int) -> SvipProblem:
    """Split feasibility: x in the unit ball with A x in the box [-1, 1]^m2.

    Both resolvents are metric projections (normal-cone resolvents). The zero
    vector is feasible for both sets, hence a known solution.
    """
    kids = linalg.child_seeds(seed, 1)
    A = linalg.gaussian_matrix(m2, m1, kids[0])
    return SvipProblem(
        J1=ball_resolvent(np.zeros(m1), 1.0),
        J2=box_resolvent(-np.ones(m2), np.ones(m2)),
        A=A,
        known_solution=np.zeros(m1),
    )


def gen_infeasible_fixture(seed: int = 0) -> SvipProblem:
    """Deliberate negative-test fixture with an empty solution set.

    One-dimensional split feasibility between the disjoint intervals [2, 3]
    and [-1, 0] under the identity coupling; the cutting sets the projection
    algorithms build on it become provably empty within a few iterations.
    There is no known solution to report.
    """
    return SvipProblem(
        J1=box_resolvent(np.array([2.0]), np.array([3.0])),
        J2=box_resolvent(np.array([-1.0]), np.array([0.0])),
        A=np.array([[1.0]]),
        known_solution=None,
    )


_GENERATORS = {
    "example51": (gen_example51, ("m", "seed")),
    "split_minimization": (gen_split_minimization, ("m1", "m2", "lam", "seed")),
    "split_feasibility": (gen_split_feasibility, ("m1", "m2", "seed")),
    "infeasible_fixture": (gen_infeasible_fixture, ("seed",)),
}

PROBLEM_KINDS = tuple(_GENERATORS)


def check_problem_params(kind: str, **params) -> None:
    """Validate a kind name and its parameter set without generating anything."""
    if kind not in _GENERATORS:
        raise ValueError(f"unknown problem kind {kind!r}; choose from {PROBLEM_KINDS}")
    _, names = _GENERATORS[kind]
    missing = [p for p in names if p not in params]
    if missing:
        raise ValueError(f"problem kind {kind!r} is missing parameters {missing}")
    extra = [p for p in params if p not in names]
    if extra:
        raise ValueError(f"problem kind {kind!r} got unknown parameters {extra}")


def make_problem(kind: str, **params) -> SvipProblem:
    """Instantiate a problem by kind name; used by the benchmark layer."""
    check_problem_params(kind, **params)
    gen, _ = _GENERATORS[kind]
    return gen(**params)


def recipe(kind: str, **params) -> dict:
    """Regeneration recipe for an instance: enough to rebuild it bit-exactly."""
    make_problem(kind, **params)  # validates kind and parameters
    doc = {"kind": kind, "rng": linalg.RNG_ALGORITHM}
    doc.update(params)
    return doc


def from_recipe(doc: dict) -> SvipProblem:
    doc = dict(doc)
    kind = doc.pop("kind")
    rng = doc.pop("rng", linalg.RNG_ALGORITHM)
    if rng != linalg.RNG_ALGORITHM:
        raise ValueError(
            f"recipe was generated with rng {rng!r}; this build provides {linalg.RNG_ALGORITHM!r}"
        )
    return make_problem(kind, **doc)


def recipe_json(kind: str, **params) -> str:
    return json.dumps(recipe(kind, **params), indent=2, sort_keys=True)
