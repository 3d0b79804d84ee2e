#!/usr/bin/env python3
"""Run the full six-algorithm comparison over a tolerance ladder.

Produces a termination-iteration table (rows = algorithms, columns = stopping
tolerances) in the style of the reference experiment, plus per-run CSV traces
under the output directory.

Example:
    python scripts/run_table1.py --m 60 --seeds 1 --out results/table1
"""

import argparse

from svip import bench


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=60, help="instance dimension")
    ap.add_argument("--seeds", default="1", help="comma-separated instance seeds")
    ap.add_argument("--epsilons", default="1e-2,1e-3,1e-4,1e-5")
    ap.add_argument("--max-iter", type=int, default=300)
    ap.add_argument("--out", default="results/table1")
    ap.add_argument("--verify", action="store_true", help="enable invariant monitors")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    cfg = bench.BenchConfig.from_dict({
        "problem": {"kind": "example51", "m": args.m,
                    "seeds": [int(s) for s in args.seeds.split(",")]},
        "algorithms": [{"name": n} for n in
                       ("alg33", "alg32", "alg31", "byrne", "long", "anh")],
        "epsilons": [float(e) for e in args.epsilons.split(",")],
        "max_iter": args.max_iter,
        "out_dir": args.out,
        "verify": args.verify,
        "workers": args.workers,
    })
    summary = bench.run_benchmark(cfg)
    print(bench.format_table(summary))
    print(f"\ntraces and summary.json written to {args.out}")
    return bench.summary_exit_code(summary)


if __name__ == "__main__":
    raise SystemExit(main())
