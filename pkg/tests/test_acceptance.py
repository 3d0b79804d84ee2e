"""Acceptance gate: one test per criterion, each printing a pass/fail line.

The expensive reference runs (dimension 60, twenty seeds, six algorithms) are
shared between the convergence-reproduction and anchor-monotonicity checks
through a session fixture. Stated runtime budgets are asserted alongside the
numerical tolerances.

Known red: the anchor-monotonicity criterion fails for the shrinking variant
that projects the previous iterate. The projections there are exact (KKT
certificates to machine precision), but the distance-to-anchor sequence of
that variant is genuinely not monotone on randomly generated instances; the
monotone property holds only for the two anchored variants. The criterion is
asserted as stated rather than weakened.
"""

import json
import time

import numpy as np
import pytest

from svip import bench, cli, linalg, problems
from svip.operators import (
    ResolventOp,
    ball_resolvent,
    box_resolvent,
    check_firmly_nonexpansive,
    l1_resolvent,
    linear_psd_resolvent,
    zero_resolvent,
)
from svip.projections import (
    PROPER,
    HalfSpace,
    Polyhedron,
    halfspace_from_descent,
    project_halfspace,
    project_polyhedron,
    project_polyhedron_oracle,
    project_two_halfspaces,
)
from svip.solvers import (
    MAX_ITER,
    TOLERANCE_MET,
    SolverParams,
    SvipProblem,
    run_alg31_hybrid,
    run_alg32_shrinking_anchor,
    run_alg33_shrinking_previous,
    run_anh_mann,
    run_byrne_halpern,
    run_long_viscosity,
)

M_REFERENCE = 60
SEEDS_REFERENCE = list(range(1, 21))
REFERENCE_PARAMS = dict(alpha=0.5, beta=1.0, sigma=1.5, max_iter=300, epsilon=1e-5)


def report(criterion: int, ok: bool, detail: str) -> None:
    print(f"[criterion {criterion}] {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {criterion}: {detail}"


def start_points(seed: int, dim: int):
    kids = linalg.child_seeds(seed, 5)
    return linalg.gaussian_vector(dim, kids[3]), linalg.gaussian_vector(dim, kids[4])


def test_criterion_1_operator_calculus():
    t0 = time.perf_counter()
    dim = 20
    G = linalg.gaussian_matrix(dim, dim, 1000)
    lo = -np.abs(linalg.gaussian_vector(dim, 1001)) - 0.1
    hi = np.abs(linalg.gaussian_vector(dim, 1002)) + 0.1
    resolvents = [
        zero_resolvent(dim),
        linear_psd_resolvent(G.T @ G),
        l1_resolvent(dim, 0.6),
        box_resolvent(lo, hi),
        ball_resolvent(linalg.gaussian_vector(dim, 1003), 2.0),
    ]
    worst_defect = -np.inf
    for idx, J in enumerate(resolvents):
        rep = check_firmly_nonexpansive(J, 1.0, 200, seed=2000 + idx)
        assert rep.passed, f"firm nonexpansiveness failed for kind {J.kind}"
        comp = ResolventOp(J.dim, J.kind, lambda b, v, J=J: v - J(b, v))
        rep_c = check_firmly_nonexpansive(comp, 1.0, 200, seed=2100 + idx)
        assert rep_c.passed, f"complement firm nonexpansiveness failed for {J.kind}"
        worst_defect = max(worst_defect, rep.max_violation, rep_c.max_violation)

    for trial in range(100):
        M = linalg.gaussian_matrix(6, 5, 2200 + trial)
        x = linalg.gaussian_vector(5, 2300 + trial)
        y = linalg.gaussian_vector(6, 2400 + trial)
        gap = abs(float((M @ x) @ y) - float(x @ (M.T @ y)))
        assert gap <= 1e-10 * (1.0 + np.linalg.norm(x) * np.linalg.norm(y))

    # projection characterization <p - x, p - y> <= tol for members y
    h = HalfSpace(linalg.gaussian_vector(6, 2500), 0.4)
    hs = [HalfSpace(linalg.gaussian_vector(6, 2501 + i),
                    float(linalg.gaussian_vector(6, 2501 + i) @ np.zeros(6)) + 0.5)
          for i in range(3)]
    poly = Polyhedron.from_halfspaces(hs, dim=6)
    for proj, members in [
        (lambda v: project_halfspace(h, v),
         [project_halfspace(h, linalg.gaussian_vector(6, 2600 + k) * 3) for k in range(50)]),
        (lambda v: project_polyhedron(poly, v, tol=1e-12).point,
         [project_polyhedron(poly, linalg.gaussian_vector(6, 2700 + k) * 3, tol=1e-12).point
          for k in range(50)]),
    ]:
        x = linalg.gaussian_vector(6, 2800) * 3.0
        p = proj(x)
        for y in members:
            bound = 1e-8 * (1 + np.linalg.norm(x)) * (1 + np.linalg.norm(y))
            assert float((p - x) @ (p - y)) <= bound

    elapsed = time.perf_counter() - t0
    report(1, elapsed < 10.0,
           f"resolvent calculus properties hold (worst defect {worst_defect:.2e}, "
           f"{elapsed:.1f}s < 10s)")


def test_criterion_2_projection_oracle_equivalence():
    t0 = time.perf_counter()
    cases = 0
    worst = 0.0
    seed = 0
    while cases < 500:
        seed += 1
        rng_draw = linalg.normal_draws(3000 + seed, 3)
        k = 1 + int(abs(rng_draw[0]) * 2.5) % 5
        dim = 2 + int(abs(rng_draw[1]) * 4.0) % 7
        draws = linalg.normal_draws(4000 + seed, dim + k * (dim + 2))
        w = draws[:dim]
        hs = []
        for i in range(k):
            chunk = draws[dim + i * (dim + 2):dim + (i + 1) * (dim + 2)]
            a = chunk[:dim]
            slack = abs(chunk[dim]) if abs(chunk[dim + 1]) > 0.4 else 0.0
            hs.append(HalfSpace(a, float(a @ w) + slack))
        poly = Polyhedron.from_halfspaces(hs, dim=dim)
        if poly.infeasible or len(poly.halfspaces) == 0:
            continue
        x = linalg.normal_draws(5000 + seed, dim) * 2.0
        expected = project_polyhedron_oracle(poly, x)
        got = project_polyhedron(poly, x, tol=1e-12).point
        gap = float(np.linalg.norm(got - expected))
        worst = max(worst, gap)
        assert gap <= 1e-7, f"case {seed}: polyhedron path off oracle by {gap:.2e}"
        if len(poly.halfspaces) == 2:
            got2 = project_two_halfspaces(poly.halfspaces[0], poly.halfspaces[1], x)
            gap2 = float(np.linalg.norm(got2 - expected))
            worst = max(worst, gap2)
            assert gap2 <= 1e-7, f"case {seed}: two-halfspace path off oracle by {gap2:.2e}"
        cases += 1
    elapsed = time.perf_counter() - t0
    report(2, elapsed < 30.0,
           f"{cases} random cases within 1e-7 of the active-set oracle "
           f"(worst {worst:.2e}, {elapsed:.1f}s < 30s)")


def _rebuild_cut(rec) -> HalfSpace:
    return halfspace_from_descent(rec.z, rec.u, rec.theta)


def test_criterion_3_descent_monitor():
    t0 = time.perf_counter()
    params = SolverParams(**REFERENCE_PARAMS)
    checked = 0
    for seed in range(1, 6):
        problem = problems.gen_example51(M_REFERENCE, seed=seed)
        xstar = problem.known_solution
        x0, x1 = start_points(seed, M_REFERENCE)
        runs = {
            "alg31": run_alg31_hybrid(problem, params, x0, x1, verify=True),
            "alg32": run_alg32_shrinking_anchor(problem, params, x0, x1, verify=True),
            "alg33": run_alg33_shrinking_previous(problem, params, x0, x1, verify=True),
        }
        for name, result in runs.items():
            assert result.termination in (TOLERANCE_MET, MAX_ITER), \
                f"{name} seed {seed}: unexpected termination {result.termination}"
            for rec in result.records:
                assert rec.theta >= -1e-12
                lhs = np.linalg.norm(rec.u - xstar) ** 2
                rhs = np.linalg.norm(rec.z - xstar) ** 2
                assert lhs <= rhs - rec.theta + 1e-9 * (1.0 + rhs), \
                    f"{name} seed {seed} n={rec.n}: descent inequality violated"
                cut = _rebuild_cut(rec)
                if cut.kind == PROPER:
                    assert cut.violation(xstar) <= 1e-9, \
                        f"{name} seed {seed} n={rec.n}: solution outside cut"
                if name == "alg31":
                    a_q = x1 - rec.x
                    q = HalfSpace(a_q, float(a_q @ rec.x))
                    if q.kind == PROPER:
                        assert q.violation(xstar) <= 1e-9, \
                            f"alg31 seed {seed} n={rec.n}: solution outside anchor set"
                checked += 1
    elapsed = time.perf_counter() - t0
    report(3, elapsed < 60.0,
           f"descent inequality, cut-margin sign, and solution membership hold over "
           f"{checked} iterations on 5 seeds ({elapsed:.1f}s < 60s)")


@pytest.fixture(scope="session")
def reference_runs():
    """Six algorithms at the reference settings over twenty seeds."""
    t0 = time.perf_counter()
    params = SolverParams(**REFERENCE_PARAMS)
    runs = {}
    for seed in SEEDS_REFERENCE:
        problem = problems.gen_example51(M_REFERENCE, seed=seed)
        x0, x1 = start_points(seed, M_REFERENCE)
        runs[("alg33", seed)] = run_alg33_shrinking_previous(problem, params, x0, x1)
        runs[("alg32", seed)] = run_alg32_shrinking_anchor(problem, params, x0, x1)
        runs[("alg31", seed)] = run_alg31_hybrid(problem, params, x0, x1)
        runs[("byrne", seed)] = run_byrne_halpern(problem, params, x1)
        runs[("long", seed)] = run_long_viscosity(problem, params, x0, x1)
        runs[("anh", seed)] = run_anh_mann(problem, params, x0, x1)
        runs[("_x1", seed)] = x1
    runs["_elapsed"] = time.perf_counter() - t0
    return runs


def test_criterion_4_convergence_reproduction(reference_runs):
    n_fast = 0
    n_ordered = 0
    for seed in SEEDS_REFERENCE:
        r33 = reference_runs[("alg33", seed)]
        rl = reference_runs[("long", seed)]
        ra = reference_runs[("anh", seed)]
        rb = reference_runs[("byrne", seed)]
        if r33.termination == TOLERANCE_MET and r33.iterations <= 60:
            n_fast += 1
        ordered = (r33.iterations < rl.iterations < ra.iterations
                   and rb.termination == MAX_ITER and rb.iterations == 300)
        if ordered:
            n_ordered += 1
    elapsed = reference_runs["_elapsed"]
    ok = n_fast >= 18 and n_ordered >= 16 and elapsed < 300.0
    report(4, ok,
           f"previous-iterate variant met 1e-5 within 60 iterations on {n_fast}/20 seeds "
           f"(need >= 18); table ordering reproduced on {n_ordered}/20 (need >= 16); "
           f"runs took {elapsed:.0f}s < 300s")


def test_criterion_5_anchor_monotonicity(reference_runs):
    violations = {}
    for name in ("alg31", "alg32", "alg33"):
        worst = 0.0
        seeds_hit = []
        for seed in SEEDS_REFERENCE:
            x1 = reference_runs[("_x1", seed)]
            result = reference_runs[(name, seed)]
            dists = np.array([np.linalg.norm(rec.x - x1) for rec in result.records])
            drops = np.diff(dists)
            bad = drops < -1e-10
            if bad.any():
                seeds_hit.append(seed)
                worst = min(worst, float(drops.min()))
        violations[name] = (seeds_hit, worst)
    detail = "; ".join(
        f"{name}: {'monotone' if not hit else f'{len(hit)} seeds violate (worst {worst:.1e})'}"
        for name, (hit, worst) in violations.items()
    )
    ok = all(not hit for hit, _ in violations.values())
    report(5, ok, f"distance to the start point along each trajectory - {detail}")


def test_criterion_6_dimension_sweep():
    t0 = time.perf_counter()
    params = SolverParams(alpha=0.5, beta=1.0, sigma=1.5, max_iter=300, epsilon=1e-4)
    outcome = {}
    for m in (60, 100, 150, 200):
        wins = 0
        for seed in range(1, 11):
            problem = problems.gen_example51(m, seed=seed)
            x0, x1 = start_points(seed, m)
            result = run_alg33_shrinking_previous(problem, params, x0, x1)
            if result.termination == TOLERANCE_MET:
                wins += 1
        outcome[m] = wins
    elapsed = time.perf_counter() - t0
    ok = all(w >= 9 for w in outcome.values()) and elapsed < 600.0
    report(6, ok,
           "tolerance met (not cap) at 1e-4 on "
           + ", ".join(f"{w}/10 seeds at m={m}" for m, w in outcome.items())
           + f" ({elapsed:.0f}s < 600s)")


def test_criterion_7_determinism(tmp_path):
    doc = {
        "problem": {"kind": "example51", "m": 20, "seeds": [1, 2]},
        "algorithms": [{"name": "alg33"}, {"name": "byrne"}],
        "epsilons": [1e-3],
        "max_iter": 100,
    }
    summaries = []
    for label in ("first", "second"):
        cfg = bench.BenchConfig.from_dict({**doc, "out_dir": str(tmp_path / label)})
        summaries.append(bench.run_benchmark(cfg))

    def mask_csv(text):
        lines = text.split("\n")
        idx = lines[0].split(",").index("elapsed_ms")
        masked = [lines[0]]
        for line in lines[1:]:
            if line:
                parts = line.split(",")
                parts[idx] = "#"
                masked.append(",".join(parts))
        return "\n".join(masked).encode()

    compared = 0
    for run in summaries[0]["runs"]:
        a = (tmp_path / "first" / run["trace"]).read_text()
        b = (tmp_path / "second" / run["trace"]).read_text()
        assert mask_csv(a) == mask_csv(b), f"trace {run['trace']} differs between runs"
        compared += 1

    def mask_json(summary):
        doc = json.loads(json.dumps(summary))
        for run in doc["runs"]:
            for key in bench.TIMING_JSON_KEYS:
                run.pop(key, None)
        doc["config"].pop("out_dir", None)
        return doc

    assert mask_json(summaries[0]) == mask_json(summaries[1])
    report(7, True,
           f"two consecutive runs produced byte-identical traces ({compared} files, "
           "timing columns excluded) and identical summaries")


def test_criterion_8_degenerate_branches(tmp_path):
    # stepsize degenerates to zero when the second operator's displacement vanishes
    dim = 6
    G = linalg.gaussian_matrix(dim, dim, 8000)
    problem = SvipProblem(
        J1=linear_psd_resolvent(G.T @ G),
        J2=zero_resolvent(dim),
        A=linalg.gaussian_matrix(dim, dim, 8001),
        known_solution=np.zeros(dim),
    )
    x0, x1 = start_points(99, dim)
    params = SolverParams(max_iter=40)
    for runner in (run_alg31_hybrid, run_alg33_shrinking_previous):
        result = runner(problem, params, x0, x1, verify=True)
        assert result.termination in (TOLERANCE_MET, MAX_ITER)
        assert all(rec.gamma == 0.0 for rec in result.records)

    # an infeasible shrinking set surfaces as the infeasibility exit code
    config = {
        "problem": {"kind": "infeasible_fixture", "seed": 1},
        "algorithms": [{"name": "alg33"}],
        "epsilons": [1e-5],
        "max_iter": 50,
        "out_dir": str(tmp_path / "infeasible"),
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(config))
    code = cli.main(["bench", str(cfg_path)])
    assert code == 4, f"expected exit code 4, got {code}"
    summary = json.loads((tmp_path / "infeasible" / "summary.json").read_text())
    assert summary["runs"][0]["termination"] == "infeasible-set"
    report(8, True,
           "zero-stepsize branch completed without error on both projection variants; "
           "infeasible shrinking set terminated with the infeasibility tag and exit code 4")
