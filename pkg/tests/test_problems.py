import dataclasses
import json

import numpy as np
import pytest

from svip import linalg, problems
from svip.operators import Box, check_firmly_nonexpansive
from svip.solvers import (
    TOLERANCE_MET,
    SolverParams,
    residual,
    run_alg31_hybrid,
    run_alg33_shrinking_previous,
    run_byrne_halpern,
)


def starts(seed, dim):
    kids = linalg.child_seeds(seed, 5)
    return linalg.gaussian_vector(dim, kids[3]), linalg.gaussian_vector(dim, kids[4])


class TestExample51:
    def test_known_solution_has_zero_residual(self):
        p = problems.gen_example51(15, seed=3)
        assert residual(p, p.known_solution, 1.0) <= 1e-10

    def test_deterministic(self):
        a = problems.gen_example51(10, seed=4)
        b = problems.gen_example51(10, seed=4)
        np.testing.assert_array_equal(a.A, b.A)
        v = linalg.gaussian_vector(10, 99)
        np.testing.assert_array_equal(a.J1(1.0, v), b.J1(1.0, v))
        np.testing.assert_array_equal(a.J2(0.5, v), b.J2(0.5, v))

    def test_seed_changes_instance(self):
        a = problems.gen_example51(10, seed=4)
        b = problems.gen_example51(10, seed=5)
        assert np.any(a.A != b.A)

    def test_first_operator_is_psd_quadratic_form(self):
        # rebuild the generating matrix from the documented child-seed layout
        m, seed = 9, 6
        kids = linalg.child_seeds(seed, 3)
        A1 = linalg.gaussian_matrix(m, m, kids[1])
        M = A1.T @ A1
        for k in range(100):
            x = linalg.gaussian_vector(m, 1000 + k)
            assert float(x @ (M @ x)) >= -1e-10

    def test_square_shapes(self):
        p = problems.gen_example51(7, seed=8)
        assert p.A.shape == (7, 7)
        assert p.dim1 == p.dim2 == 7

    def test_resolvents_firmly_nonexpansive(self):
        p = problems.gen_example51(8, seed=9)
        assert check_firmly_nonexpansive(p.J1, 1.0, 200, seed=1).passed
        assert check_firmly_nonexpansive(p.J2, 1.0, 200, seed=2).passed


class TestSplitMinimization:
    def test_zero_vector_is_solution(self):
        p = problems.gen_split_minimization(10, 6, lam=0.5, seed=11)
        assert residual(p, np.zeros(10), 1.0) <= 1e-10

    def test_soft_threshold_resolvent_firmly_nonexpansive(self):
        p = problems.gen_split_minimization(12, 5, lam=0.8, seed=12)
        assert check_firmly_nonexpansive(p.J1, 1.0, 200, seed=3).passed

    def test_degenerate_whole_space_instance_stops_immediately(self):
        # lam = 0 and an unbounded box make every point a solution, so the
        # residual rule fires at the very first iterate from any start
        unbounded = Box(np.full(4, -np.inf), np.full(4, np.inf))
        p = problems.gen_split_minimization(4, 4, lam=0.0, seed=13, box=unbounded)
        p = dataclasses.replace(p, known_solution=None)
        x0, x1 = starts(13, 4)
        for runner in (run_alg31_hybrid, run_alg33_shrinking_previous):
            result = runner(p, SolverParams(epsilon=1e-8), x0, x1)
            assert result.termination == TOLERANCE_MET
            assert result.iterations == 1
        result = run_byrne_halpern(p, SolverParams(epsilon=1e-8), x1)
        assert result.iterations == 1

    def test_random_box_contains_origin(self):
        p = problems.gen_split_minimization(6, 8, lam=0.1, seed=14)
        assert residual(p, np.zeros(6), 2.0) <= 1e-10


class TestSplitFeasibility:
    def test_zero_vector_is_solution(self):
        p = problems.gen_split_feasibility(9, 7, seed=15)
        assert residual(p, np.zeros(9), 1.0) <= 1e-10

    def test_outside_point_projects_to_sphere(self):
        p = problems.gen_split_feasibility(5, 5, seed=16)
        far = linalg.gaussian_vector(5, 17) * 10.0
        projected = p.J1(1.0, far)
        assert np.linalg.norm(projected) == pytest.approx(1.0, abs=1e-12)

    def test_alg33_drives_residual_below_1e6(self):
        # empirical convergence over ten random instances
        for seed in range(1, 11):
            p = problems.gen_split_feasibility(20, 20, seed=seed)
            p = dataclasses.replace(p, known_solution=None)
            x0, x1 = starts(seed, 20)
            result = run_alg33_shrinking_previous(p, SolverParams(epsilon=1e-6),
                                                  x0, x1)
            assert result.termination == TOLERANCE_MET
            assert result.iterations <= 300


class TestRecipes:
    def test_round_trip_regenerates_identical_instance(self):
        doc = problems.recipe("example51", m=8, seed=21)
        a = problems.from_recipe(doc)
        b = problems.gen_example51(8, seed=21)
        np.testing.assert_array_equal(a.A, b.A)

    def test_recipe_records_rng_and_parameters(self):
        doc = problems.recipe("split_feasibility", m1=5, m2=4, seed=22)
        assert doc["rng"] == linalg.RNG_ALGORITHM
        assert doc["kind"] == "split_feasibility"
        assert (doc["m1"], doc["m2"], doc["seed"]) == (5, 4, 22)

    def test_recipe_json_parses(self):
        text = problems.recipe_json("example51", m=6, seed=23)
        doc = json.loads(text)
        assert doc["kind"] == "example51"
        assert problems.from_recipe(doc).dim1 == 6

    def test_foreign_rng_rejected(self):
        doc = problems.recipe("example51", m=6, seed=23)
        doc["rng"] = "mt19937-polar"
        with pytest.raises(ValueError):
            problems.from_recipe(doc)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            problems.make_problem("example52", m=6, seed=1)

    def test_unknown_parameter_rejected(self):
        with pytest.raises(ValueError):
            problems.make_problem("example51", m=6, seed=1, rho=2.0)

    def test_missing_parameter_rejected(self):
        with pytest.raises(ValueError):
            problems.make_problem("split_minimization", m1=4, seed=1)
