#!/usr/bin/env python3
"""Overlap experiment: solve time vs probability of measure sharing.

Fixed graph size and measure count; sweeps the overlap probability from
independent measures (p=0) to maximal sharing (p=1).
"""
import argparse
from pathlib import Path

from icsguard.bench import BenchGrid, records_to_csv, run_benchmark, summarize


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=1000)
    ap.add_argument("--measures", type=int, default=5, help="measures per node")
    ap.add_argument("--overlaps", type=float, nargs="+", default=[0.0, 0.25, 0.5, 0.75, 1.0])
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--timeout", type=float, default=None, help="per-trial solve budget in seconds")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    args = ap.parse_args()

    grid = BenchGrid(
        sizes=(args.size,),
        measure_counts=(args.measures,),
        overlaps=tuple(args.overlaps),
        trials=args.trials,
        seed=args.seed,
        timeout_s=args.timeout,
        workers=args.workers,
    )
    records = run_benchmark(grid)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    raw = args.out_dir / "overlap.csv"
    raw.write_text(records_to_csv(records), encoding="utf-8")
    summary = args.out_dir / "overlap.summary.csv"
    summary.write_text(summarize(records), encoding="utf-8")
    print(f"wrote {raw} ({len(records)} rows) and {summary}")
    print(summarize(records), end="")


if __name__ == "__main__":
    main()
