"""Benchmark harness: run algorithm/seed/epsilon grids, emit traces and summaries.

A benchmark is described by a single JSON config document::

    {
      "problem":    {"kind": "example51", "m": 60, "seeds": [1, 2, 3]},
      "algorithms": [{"name": "alg33"}, {"name": "byrne", "gamma": null}],
      "epsilons":   [1e-2, 1e-3, 1e-4, 1e-5],
      "max_iter":   300,
      "out_dir":    "svip-results",
      "verify":     false,
      "workers":    1
    }

Each (algorithm, seed, epsilon) run writes one CSV trace; a summary JSON
collects per-run outcomes plus a termination-iteration table (rows =
algorithms, columns = epsilons, cells = median iterations over seeds).

Everything except the elapsed-time columns/keys is reproducible byte for
byte from the config; timing lives in clearly separated fields.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import linalg, problems, solvers

TRACE_HEADER = "n,E_n,residual,gamma_n,theta_n,elapsed_ms,projection_sweeps"

# timing fields are excluded from reproducibility comparisons
TIMING_CSV_COLUMNS = ("elapsed_ms",)
TIMING_JSON_KEYS = ("wall_time_s", "step_time_s")


class ConfigError(ValueError):
    """The benchmark configuration is invalid; reported before any run."""


_ALG_KEYS = {
    "alg31": {"alpha", "beta", "sigma"},
    "alg32": {"alpha", "beta", "sigma"},
    "alg33": {"alpha", "beta", "sigma"},
    "byrne": {"beta", "gamma"},
    "long": {"beta", "gamma", "contraction", "alpha_cap"},
    "anh": {"beta", "gamma", "alpha_cap"},
}

ALGORITHM_NAMES = tuple(_ALG_KEYS)


@dataclass(frozen=True)
class BenchConfig:
    problem: dict
    algorithms: list[dict]
    epsilons: list[float]
    max_iter: int = 300
    out_dir: str = "svip-results"
    verify: bool = False
    workers: int = 1

    @classmethod
    def from_dict(cls, doc: dict) -> "BenchConfig":
        known = {"problem", "algorithms", "epsilons", "max_iter", "out_dir",
                 "verify", "workers"}
        extra = set(doc) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            cfg = cls(**doc)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        cfg.validate()
        return cfg

    @classmethod
    def from_json_file(cls, path) -> "BenchConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc)

    def validate(self) -> None:
        if not isinstance(self.problem, dict) or "kind" not in self.problem:
            raise ConfigError("problem block must be a dict with a 'kind'")
        prob = dict(self.problem)
        kind = prob.pop("kind")
        seeds = self.seeds()
        prob.pop("seeds", None)
        prob.setdefault("seed", seeds[0])
        try:
            problems.check_problem_params(kind, **prob)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not self.algorithms:
            raise ConfigError("need at least one algorithm")
        if not self.epsilons:
            raise ConfigError("need at least one epsilon")
        for eps in self.epsilons:
            if not (isinstance(eps, (int, float)) and eps > 0):
                raise ConfigError(f"epsilon must be positive, got {eps}")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for block in self.algorithms:
            if not isinstance(block, dict) or "name" not in block:
                raise ConfigError("each algorithm block needs a 'name'")
            name = block["name"]
            if name not in _ALG_KEYS:
                raise ConfigError(f"unknown algorithm {name!r}; choose from {ALGORITHM_NAMES}")
            extra = set(block) - _ALG_KEYS[name] - {"name"}
            if extra:
                raise ConfigError(f"algorithm {name!r}: unknown keys {sorted(extra)}")
            # constant windows are enforced by the solver parameter type
            try:
                self._params_for(block)
            except ValueError as exc:
                raise ConfigError(f"algorithm {name!r}: {exc}") from exc

    def seeds(self) -> list[int]:
        if "seeds" in self.problem:
            seeds = list(self.problem["seeds"])
        else:
            seeds = [self.problem.get("seed", 0)]
        if not seeds:
            raise ConfigError("problem block has an empty 'seeds' list")
        return [int(s) for s in seeds]

    def problem_params(self, seed: int) -> dict:
        prob = {k: v for k, v in self.problem.items() if k not in ("kind", "seed", "seeds")}
        prob["seed"] = seed
        return prob

    def _params_for(self, block: dict, epsilon: float = 1.0) -> solvers.SolverParams:
        return solvers.SolverParams(
            alpha=block.get("alpha", 0.5),
            beta=block.get("beta", 1.0),
            sigma=block.get("sigma", 1.5),
            max_iter=self.max_iter,
            epsilon=epsilon,
        )


def _dispatch(name: str, block: dict, problem, params, x0, x1, verify):
    if name == "alg31":
        return solvers.run_alg31_hybrid(problem, params, x0, x1, verify=verify)
    if name == "alg32":
        return solvers.run_alg32_shrinking_anchor(problem, params, x0, x1, verify=verify)
    if name == "alg33":
        return solvers.run_alg33_shrinking_previous(problem, params, x0, x1, verify=verify)
    if name == "byrne":
        return solvers.run_byrne_halpern(problem, params, x1,
                                         gamma=block.get("gamma"), verify=verify)
    if name == "long":
        return solvers.run_long_viscosity(problem, params, x0, x1,
                                          contraction=block.get("contraction", 0.8),
                                          alpha_cap=block.get("alpha_cap", 0.5),
                                          gamma=block.get("gamma"), verify=verify)
    if name == "anh":
        return solvers.run_anh_mann(problem, params, x0, x1,
                                    alpha_cap=block.get("alpha_cap", 0.5),
                                    gamma=block.get("gamma"), verify=verify)
    raise ConfigError(f"unknown algorithm {name!r}")


def _fmt(v: float) -> str:
    return "%.17g" % v


def emit_trace_csv(result: solvers.RunResult, path) -> None:
    """Write one CSV row per iteration record, 17 significant digits, LF endings."""
    path = Path(path)
    lines = [TRACE_HEADER]
    for rec in result.records:
        e = "" if rec.error_to_solution is None else _fmt(rec.error_to_solution)
        sweeps = "" if rec.projection_sweeps is None else str(rec.projection_sweeps)
        lines.append(",".join([
            str(rec.n), e, _fmt(rec.residual), _fmt(rec.gamma), _fmt(rec.theta),
            _fmt(rec.elapsed * 1e3), sweeps,
        ]))
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write trace to {path}: {exc}") from exc


def load_trace_csv(path) -> list[dict]:
    """Parse a trace CSV back into per-iteration dicts (None for empty cells)."""
    text = Path(path).read_text()
    lines = text.strip().split("\n")
    if lines[0] != TRACE_HEADER:
        raise ValueError(f"unexpected trace header in {path}: {lines[0]!r}")
    cols = TRACE_HEADER.split(",")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        row = {}
        for name, cell in zip(cols, parts):
            if cell == "":
                row[name] = None
            elif name in ("n", "projection_sweeps"):
                row[name] = int(cell)
            else:
                row[name] = float(cell)
        rows.append(row)
    return rows


def emit_summary_json(summary: dict, path) -> None:
    path = Path(path)
    try:
        path.write_text(json.dumps(summary, indent=2) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write summary to {path}: {exc}") from exc


def _trace_name(alg: str, seed: int, eps: float) -> str:
    return f"trace_{alg}_s{seed}_eps{eps:g}.csv"


def _run_one(cfg: BenchConfig, block: dict, problem, seed: int, eps: float,
             x0, x1) -> dict:
    name = block["name"]
    params = cfg._params_for(block, epsilon=eps)
    entry = {
        "algorithm": name,
        "seed": seed,
        "m": problem.dim1,
        "epsilon": eps,
        "iterations": None,
        "termination": None,
        "final_error": None,
        "final_residual": None,
        "failure": None,
        "trace": _trace_name(name, seed, eps),
        "wall_time_s": None,
        "step_time_s": None,
    }
    t0 = time.perf_counter()
    try:
        result = _dispatch(name, block, problem, params, x0, x1, cfg.verify)
    except Exception as exc:  # per-run failures must not abort the grid
        entry["failure"] = f"{type(exc).__name__}: {exc}"
        entry["trace"] = None
        entry["_result"] = None
        return entry
    entry["wall_time_s"] = time.perf_counter() - t0
    last = result.records[-1]
    entry["iterations"] = result.iterations
    entry["termination"] = result.termination
    entry["final_error"] = last.error_to_solution
    entry["final_residual"] = last.residual
    entry["failure"] = result.failure
    entry["step_time_s"] = sum(rec.elapsed for rec in result.records)
    entry["_result"] = result
    return entry


def run_benchmark(cfg: BenchConfig) -> dict:
    """Execute the config's (algorithm, seed, epsilon) grid.

    Writes one trace CSV per run plus `summary.json` into the output
    directory and returns the summary document. Per-run failures are recorded
    in the summary without aborting the remaining runs.
    """
    cfg.validate()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seeds = cfg.seeds()
    kind = cfg.problem["kind"]

    instances = {}
    starts = {}
    for seed in seeds:
        instances[seed] = problems.make_problem(kind, **cfg.problem_params(seed))
        kids = linalg.child_seeds(seed, 5)
        dim = instances[seed].dim1
        starts[seed] = (linalg.gaussian_vector(dim, kids[3]),
                        linalg.gaussian_vector(dim, kids[4]))

    tasks = [(block, seed, eps)
             for block in cfg.algorithms for seed in seeds for eps in cfg.epsilons]

    def work(task):
        block, seed, eps = task
        x0, x1 = starts[seed]
        return _run_one(cfg, block, instances[seed], seed, eps, x0, x1)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            entries = list(pool.map(work, tasks))
    else:
        entries = [work(t) for t in tasks]

    for entry in entries:
        result = entry.pop("_result")
        if result is not None:
            emit_trace_csv(result, out / entry["trace"])

    table = _termination_table(cfg, entries)
    summary = {
        "rng": linalg.RNG_ALGORITHM,
        "config": {
            "problem": cfg.problem,
            "algorithms": cfg.algorithms,
            "epsilons": cfg.epsilons,
            "max_iter": cfg.max_iter,
            "verify": cfg.verify,
        },
        "runs": entries,
        "table": table,
    }
    emit_summary_json(summary, out / "summary.json")
    return summary


def _termination_table(cfg: BenchConfig, entries: list[dict]) -> dict:
    rows = []
    for block in cfg.algorithms:
        name = block["name"]
        cells = []
        for eps in cfg.epsilons:
            counts = [e["iterations"] for e in entries
                      if e["algorithm"] == name and e["epsilon"] == eps
                      and e["iterations"] is not None]
            cells.append(float(np.median(counts)) if counts else None)
        rows.append({"algorithm": name, "iterations": cells})
    return {"epsilons": list(cfg.epsilons), "rows": rows}


def summary_exit_code(summary: dict) -> int:
    """0 on success, 3 when any run failed numerically, 4 on infeasibility."""
    runs = summary["runs"]
    if any(r["termination"] == solvers.INFEASIBLE_SET for r in runs):
        return 4
    if any(r["termination"] == solvers.NUMERICAL_FAILURE or r["failure"] is not None
           for r in runs):
        return 3
    return 0


def format_table(summary: dict) -> str:
    """Plain-text termination-iteration table (rows algorithms, columns epsilons)."""
    table = summary["table"]
    eps_labels = [f"eps={e:g}" for e in table["epsilons"]]
    width = max([len("algorithm")] + [len(r["algorithm"]) for r in table["rows"]]) + 2
    out = ["algorithm".ljust(width) + "  ".join(lab.rjust(10) for lab in eps_labels)]
    for row in table["rows"]:
        cells = []
        for c in row["iterations"]:
            if c is None:
                cells.append("-".rjust(10))
            else:
                cells.append((f"{int(c)}" if float(c).is_integer() else f"{c:.1f}").rjust(10))
        out.append(row["algorithm"].ljust(width) + "  ".join(cells))
    return "\n".join(out)
