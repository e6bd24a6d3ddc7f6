#!/usr/bin/env python3
"""Scaling experiment: solve time vs graph size and measures per node.

Runs the solver over a size grid with non-overlapping measures and writes
raw per-trial rows plus a per-cell summary.
"""
import argparse
from pathlib import Path

from icsguard.bench import BenchGrid, records_to_csv, run_benchmark, summarize


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 500, 1000, 5000, 10000])
    ap.add_argument("--measures", type=int, nargs="+", default=[1, 5, 7, 10],
                    help="measures per node (one grid column per value)")
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--timeout", type=float, default=None, help="per-trial solve budget in seconds")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    args = ap.parse_args()

    grid = BenchGrid(
        sizes=tuple(args.sizes),
        measure_counts=tuple(args.measures),
        overlaps=(0.0,),
        trials=args.trials,
        seed=args.seed,
        timeout_s=args.timeout,
        workers=args.workers,
    )
    records = run_benchmark(grid)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    raw = args.out_dir / "scaling.csv"
    raw.write_text(records_to_csv(records), encoding="utf-8")
    summary = args.out_dir / "scaling.summary.csv"
    summary.write_text(summarize(records), encoding="utf-8")
    print(f"wrote {raw} ({len(records)} rows) and {summary}")
    print(summarize(records), end="")


if __name__ == "__main__":
    main()
