"""Command-line interface.

Subcommands::

    svip bench <config.json> [flags]   run a benchmark grid, write traces + summary
    svip verify <config.json> [flags]  same grid with invariant monitors enabled
    svip gen <kind> --seed S [...]     print an instance regeneration recipe

Exit codes: 0 success, 2 config error, 3 one or more runs failed numerically,
4 infeasibility encountered. The output directory may be overridden with the
SVIP_OUT_DIR environment variable (flag > environment > config).
"""

from __future__ import annotations

import argparse
import os
import sys

from . import bench, problems

OUT_DIR_ENV = "SVIP_OUT_DIR"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="svip", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    for cmd, help_text in (("bench", "run a benchmark config"),
                           ("verify", "run a config with invariant monitors on")):
        p = sub.add_parser(cmd, help=help_text)
        p.add_argument("config", help="path to the JSON config document")
        p.add_argument("--problem", help="override the problem kind")
        p.add_argument("--seed", help="override seeds (comma-separated integers)")
        p.add_argument("--epsilon", help="override epsilons (comma-separated floats)")
        p.add_argument("--max-iter", type=int, help="override the iteration cap")
        p.add_argument("--algorithms", help="override the algorithm list (comma-separated names)")
        p.add_argument("--out", help="override the output directory")
        p.add_argument("--verify", action="store_true",
                       help="enable invariant monitors (implied by the verify subcommand)")

    g = sub.add_parser("gen", help="print an instance regeneration recipe as JSON")
    g.add_argument("kind", choices=problems.PROBLEM_KINDS)
    g.add_argument("--m", type=int, help="dimension (square instances)")
    g.add_argument("--m1", type=int, help="domain dimension")
    g.add_argument("--m2", type=int, help="range dimension")
    g.add_argument("--lam", type=float, help="l1 weight (split minimization)")
    g.add_argument("--seed", type=int, required=True)
    return parser


def _apply_overrides(doc: dict, args) -> dict:
    doc = dict(doc)
    doc["problem"] = dict(doc.get("problem", {}))
    if args.problem:
        doc["problem"]["kind"] = args.problem
    if args.seed:
        doc["problem"].pop("seed", None)
        doc["problem"]["seeds"] = [int(s) for s in args.seed.split(",")]
    if args.epsilon:
        doc["epsilons"] = [float(e) for e in args.epsilon.split(",")]
    if args.max_iter is not None:
        doc["max_iter"] = args.max_iter
    if args.algorithms:
        doc["algorithms"] = [{"name": n.strip()} for n in args.algorithms.split(",")]
    if args.out:
        doc["out_dir"] = args.out
    elif os.environ.get(OUT_DIR_ENV):
        doc["out_dir"] = os.environ[OUT_DIR_ENV]
    if args.verify or args.command == "verify":
        doc["verify"] = True
    return doc


def _cmd_bench(args) -> int:
    import json
    from pathlib import Path

    try:
        raw = json.loads(Path(args.config).read_text())
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = bench.BenchConfig.from_dict(_apply_overrides(raw, args))
    except bench.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    summary = bench.run_benchmark(cfg)
    print(bench.format_table(summary))
    failures = [r for r in summary["runs"]
                if r["failure"] is not None or r["termination"] in ("infeasible-set",
                                                                    "numerical-failure")]
    for r in failures:
        print(f"run {r['algorithm']} seed={r['seed']} eps={r['epsilon']:g}: "
              f"{r['termination'] or 'error'} ({r['failure']})", file=sys.stderr)
    print(f"results written to {cfg.out_dir}")
    return bench.summary_exit_code(summary)


def _cmd_gen(args) -> int:
    params = {"seed": args.seed}
    for name in ("m", "m1", "m2", "lam"):
        value = getattr(args, name)
        if value is not None:
            params[name] = value
    try:
        print(problems.recipe_json(args.kind, **params))
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command in ("bench", "verify"):
        return _cmd_bench(args)
    return _cmd_gen(args)


if __name__ == "__main__":
    sys.exit(main())
