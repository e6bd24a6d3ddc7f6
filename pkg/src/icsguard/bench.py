"""Timing harness: run the metric over a grid of generated models.

A grid is the cross product of graph sizes, measures-per-node counts, and
overlap probabilities, each repeated for a number of trials.  Every run
gets its own deterministic seeds derived from the grid seed, so a grid
reproduces the same models (and costs) across machines; only the timing
columns vary.  Results go to CSV, one row per run, plus a per-cell mean
summary.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import mean

from .errors import InputError
from .generate import AssignConfig, CostSampler, FixedCost, GenConfig, SplitMix64, assign_measures, generate_graph
from .metric import TargetIndestructible, compute_metric
from .model import Cost
from .sat import SolveTimeout

CSV_HEADER = "n,x,p,trial,encode_ms,solve_ms,total_cost,vars,clauses,status"

STATUS_OK = "ok"
STATUS_TIMEOUT = "timeout"
STATUS_INDESTRUCTIBLE = "indestructible"


def _fmt_float(value: float | None) -> str:
    return "" if value is None else f"{value:.3f}"


def _fmt_p(p: float) -> str:
    return f"{p:g}"


@dataclass(frozen=True)
class BenchRecord:
    """One metric run over one generated model."""

    graph_size: int
    measures_per_node: int
    overlap_probability: float
    trial: int
    encode_ms: float | None
    solve_ms: float | None
    total_cost: Cost | None
    cnf_vars: int | None
    cnf_clauses: int | None
    status: str

    def csv_row(self) -> str:
        cost = "" if self.total_cost is None else self.total_cost.to_display()
        empty_int = lambda v: "" if v is None else str(v)  # noqa: E731
        return ",".join(
            (
                str(self.graph_size),
                str(self.measures_per_node),
                _fmt_p(self.overlap_probability),
                str(self.trial),
                _fmt_float(self.encode_ms),
                _fmt_float(self.solve_ms),
                cost,
                empty_int(self.cnf_vars),
                empty_int(self.cnf_clauses),
                self.status,
            )
        )


@dataclass(frozen=True)
class BenchGrid:
    """The experiment plan: which cells to run and how often."""

    sizes: tuple[int, ...]
    measure_counts: tuple[int, ...]
    overlaps: tuple[float, ...]
    trials: int
    seed: int = 1
    timeout_s: float | None = None
    composition: tuple[int, int, int] = (60, 20, 20)
    cost_sampler: CostSampler = FixedCost(1)
    workers: int = 1

    def __post_init__(self) -> None:
        if self.trials < 0:
            raise InputError(f"trials must be non-negative, got {self.trials}")
        if self.timeout_s is not None and self.timeout_s <= 0:
            raise InputError(f"timeout must be positive, got {self.timeout_s}")
        if self.workers < 1:
            raise InputError(f"workers must be at least 1, got {self.workers}")

    def runs(self) -> list[tuple[int, int, float, int]]:
        """All (n, x, p, trial) tuples in deterministic grid order."""
        return [
            (n, x, p, trial)
            for n in self.sizes
            for x in self.measure_counts
            for p in self.overlaps
            for trial in range(1, self.trials + 1)
        ]


def _run_one(
    n: int,
    x: int,
    p: float,
    trial: int,
    gen_seed: int,
    assign_seed: int,
    grid: BenchGrid,
) -> BenchRecord:
    model = generate_graph(
        GenConfig(size=n, composition=grid.composition, seed=gen_seed)
    )
    model = assign_measures(
        model,
        AssignConfig(
            measures_per_node=x,
            overlap_probability=p,
            cost_sampler=grid.cost_sampler,
            seed=assign_seed,
        ),
    )
    deadline = None if grid.timeout_s is None else time.monotonic() + grid.timeout_s
    started = time.perf_counter()
    try:
        sol = compute_metric(model, deadline=deadline)
    except SolveTimeout:
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        return BenchRecord(
            n, x, p, trial, None, elapsed_ms, None, None, None, STATUS_TIMEOUT
        )
    except TargetIndestructible:
        # Unreachable for generated models (all costs finite); recorded for
        # totality instead of crashing a long grid.
        return BenchRecord(
            n, x, p, trial, None, None, None, None, None, STATUS_INDESTRUCTIBLE
        )
    return BenchRecord(
        n,
        x,
        p,
        trial,
        sol.encode_ms,
        sol.solve_ms,
        sol.total_cost,
        sol.cnf_vars,
        sol.cnf_clauses,
        STATUS_OK,
    )


def run_benchmark(grid: BenchGrid) -> list[BenchRecord]:
    """Execute the grid; records come back in deterministic grid order."""
    runs = grid.runs()
    seed_stream = SplitMix64(grid.seed)
    seeded = [
        (n, x, p, trial, seed_stream.next_u64(), seed_stream.next_u64())
        for (n, x, p, trial) in runs
    ]
    if grid.workers == 1:
        return [
            _run_one(n, x, p, trial, gs, as_, grid)
            for (n, x, p, trial, gs, as_) in seeded
        ]
    with ThreadPoolExecutor(max_workers=grid.workers) as pool:
        futures = [
            pool.submit(_run_one, n, x, p, trial, gs, as_, grid)
            for (n, x, p, trial, gs, as_) in seeded
        ]
        return [f.result() for f in futures]


def records_to_csv(records: list[BenchRecord]) -> str:
    lines = [CSV_HEADER]
    lines.extend(r.csv_row() for r in records)
    return "\n".join(lines) + "\n"


SUMMARY_HEADER = (
    "n,x,p,runs,ok,timeouts,mean_encode_ms,mean_solve_ms,mean_total_cost"
)


def summarize(records: list[BenchRecord]) -> str:
    """Per-cell means over successful runs, in first-seen cell order."""
    cells: dict[tuple[int, int, float], list[BenchRecord]] = {}
    for rec in records:
        key = (rec.graph_size, rec.measures_per_node, rec.overlap_probability)
        cells.setdefault(key, []).append(rec)
    lines = [SUMMARY_HEADER]
    for (n, x, p), recs in cells.items():
        done = [r for r in recs if r.status == STATUS_OK]
        timeouts = sum(1 for r in recs if r.status == STATUS_TIMEOUT)
        if done:
            enc = _fmt_float(mean(r.encode_ms for r in done))
            slv = _fmt_float(mean(r.solve_ms for r in done))
            cost = _fmt_float(mean(r.total_cost.millis for r in done) / 1000.0)
        else:
            enc = slv = cost = ""
        lines.append(
            f"{n},{x},{_fmt_p(p)},{len(recs)},{len(done)},{timeouts},{enc},{slv},{cost}"
        )
    return "\n".join(lines) + "\n"
