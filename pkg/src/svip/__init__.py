"""Solvers and benchmarks for the split variational inclusion problem.

Find x* with 0 in B1(x*) and 0 in B2(A x*), where B1 and B2 are maximal
monotone operators known through their resolvents and A is a dense linear
map. The package provides self-adaptive inertial projection algorithms and
three published baselines behind one stepping interface, the resolvent and
projection calculus they need, reproducible instance generators, and a
benchmark CLI.
"""

from .linalg import RNG_ALGORITHM, gaussian_matrix, op_norm_sq
from .operators import (
    Ball,
    Box,
    ResolventOp,
    ball_resolvent,
    box_resolvent,
    check_firmly_nonexpansive,
    l1_resolvent,
    linear_psd_resolvent,
    prox_l1,
    zero_resolvent,
)
from .problems import (
    gen_example51,
    gen_split_feasibility,
    gen_split_minimization,
    make_problem,
)
from .projections import (
    HalfSpace,
    InfeasibleSetError,
    Polyhedron,
    halfspace_from_descent,
    project_halfspace,
    project_polyhedron,
    project_two_halfspaces,
)
from .solvers import (
    IterationRecord,
    RunResult,
    SolverParams,
    SvipProblem,
    residual,
    run_alg31_hybrid,
    run_alg32_shrinking_anchor,
    run_alg33_shrinking_previous,
    run_anh_mann,
    run_byrne_halpern,
    run_long_viscosity,
)

__version__ = "0.1.0"
