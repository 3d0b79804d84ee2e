#!/usr/bin/env python3
"""Convergence behavior across instance dimensions at a fixed tolerance.

Runs the selected algorithms on random instances of each dimension and writes
per-dimension trace files (plot-ready CSV) under the output directory.

Example:
    python scripts/run_dimension_sweep.py --dims 60,100,150,200 --seeds 1,2,3
"""

import argparse
from pathlib import Path

from svip import bench


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dims", default="60,100,150,200")
    ap.add_argument("--seeds", default="1")
    ap.add_argument("--algorithms", default="alg33,long,anh,byrne")
    ap.add_argument("--epsilon", type=float, default=1e-4)
    ap.add_argument("--max-iter", type=int, default=300)
    ap.add_argument("--out", default="results/dimension-sweep")
    args = ap.parse_args()

    worst = 0
    for m in (int(d) for d in args.dims.split(",")):
        cfg = bench.BenchConfig.from_dict({
            "problem": {"kind": "example51", "m": m,
                        "seeds": [int(s) for s in args.seeds.split(",")]},
            "algorithms": [{"name": n.strip()} for n in args.algorithms.split(",")],
            "epsilons": [args.epsilon],
            "max_iter": args.max_iter,
            "out_dir": str(Path(args.out) / f"m{m}"),
        })
        summary = bench.run_benchmark(cfg)
        print(f"== m = {m} ==")
        print(bench.format_table(summary))
        worst = max(worst, bench.summary_exit_code(summary))
    print(f"\nper-dimension traces written under {args.out}")
    return worst


if __name__ == "__main__":
    raise SystemExit(main())
