"""Command-line front end: analyze models, generate them, benchmark the metric.

Exit codes: 0 success, 1 analysis error (e.g. indestructible target),
2 input error, 3 internal error.  The environment variable ICSGUARD_SEED
overrides the default seed of commands whose --seed flag is not given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from pathlib import Path

from .bench import (
    STATUS_OK,
    BenchGrid,
    records_to_csv,
    run_benchmark,
    summarize,
)
from .errors import AnalysisError, IcsguardError, InputError
from .generate import (
    AssignConfig,
    CostSampler,
    FixedCost,
    GenConfig,
    UniformCostRange,
    assign_measures,
    generate_graph,
)
from .metric import Solution, build_wcnf, compute_metric
from .model import Model, NodeKind
from .modelio import export_dot, export_wcnf, load_model, save_model, write_model
from .oracle import cheapest_disruption_exhaustive

EXIT_OK = 0
EXIT_ANALYSIS = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3

SEED_ENV_VAR = "ICSGUARD_SEED"


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return 1
    try:
        return int(raw, 0)
    except ValueError:
        raise InputError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}")


def _emit(text: str, output: str | None) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _parse_composition(raw: str) -> tuple[int, int, int]:
    parts = raw.split(",")
    if len(parts) != 3:
        raise InputError(
            f"composition must be three comma-separated percentages, got {raw!r}"
        )
    try:
        a, b, c = (int(p) for p in parts)
    except ValueError:
        raise InputError(f"composition percentages must be integers, got {raw!r}")
    return (a, b, c)


def _parse_cost_range(raw: str | None) -> CostSampler:
    if raw is None:
        return FixedCost(1)
    try:
        if ".." in raw:
            low_text, high_text = raw.split("..", 1)
            return UniformCostRange(int(low_text), int(high_text))
        return FixedCost(int(raw))
    except ValueError:
        raise InputError(
            f"cost range must be an integer or LO..HI, got {raw!r}"
        )


def _parse_list(raw: str, kind, what: str) -> tuple:
    if not raw:
        return ()
    try:
        return tuple(kind(part) for part in raw.split(","))
    except ValueError:
        raise InputError(f"{what} must be comma-separated {kind.__name__}s, got {raw!r}")


def _text_report(model: Model, sol: Solution, oracle_note: str | None) -> str:
    nodes = ", ".join(sorted(sol.atoms)) or "(none)"
    measures = ", ".join(sorted(sol.instances)) or "(none)"
    lines = [
        f"target: {model.target}",
        f"total cost: {sol.total_cost.to_display()}",
        f"critical nodes ({len(sol.atoms)}): {nodes}",
        f"critical measures ({len(sol.instances)}): {measures}",
        (
            f"stats: vars={sol.cnf_vars} clauses={sol.cnf_clauses}"
            f" sat_calls={sol.sat_calls} cores={sol.cores}"
            f" encode_ms={sol.encode_ms:.3f} solve_ms={sol.solve_ms:.3f}"
        ),
    ]
    if oracle_note is not None:
        lines.append(oracle_note)
    return "\n".join(lines) + "\n"


def _json_report(model: Model, sol: Solution, oracle_note: str | None) -> str:
    doc = {
        "target": model.target,
        "critical_nodes": sorted(sol.atoms),
        "critical_measures": sorted(sol.instances),
        "total_cost": sol.total_cost.to_json(),
        "stats": {
            "atom_cost": sol.atom_cost.to_json(),
            "instance_cost": sol.instance_cost.to_json(),
            "vars": sol.cnf_vars,
            "clauses": sol.cnf_clauses,
            "sat_calls": sol.sat_calls,
            "cores": sol.cores,
            "encode_ms": sol.encode_ms,
            "solve_ms": sol.solve_ms,
        },
    }
    if oracle_note is not None:
        doc["oracle"] = oracle_note
    return json.dumps(doc, indent=2) + "\n"


def _cmd_analyze(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    sol = compute_metric(model)

    if args.export_wcnf:
        instance, tokens = build_wcnf(model)
        Path(args.export_wcnf).write_text(
            export_wcnf(instance, tokens=tokens), encoding="utf-8"
        )

    oracle_note = None
    if args.check_oracle:
        reference = cheapest_disruption_exhaustive(model)
        if reference.total_cost_millis != sol.total_cost.millis:
            raise RuntimeError(
                f"solver/oracle disagreement: solver {sol.total_cost}"
                f" vs oracle {reference.total_cost_millis / 1000}"
            )
        oracle_note = f"oracle: agree (cost {sol.total_cost.to_display()})"

    if args.format == "json":
        report = _json_report(model, sol, oracle_note)
    elif args.format == "dot":
        report = export_dot(model, sol)
    else:
        report = _text_report(model, sol, oracle_note)
    _emit(report, args.output)
    return EXIT_OK


def _kind_counts(model: Model) -> str:
    counts = {kind: 0 for kind in NodeKind}
    for node in model.graph.nodes:
        counts[node.kind] += 1
    return ", ".join(f"{kind.value} {n}" for kind, n in counts.items() if n)


def _cmd_gen(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    cfg = GenConfig(
        size=args.size,
        composition=_parse_composition(args.config),
        seed=seed,
    )
    model = generate_graph(cfg)
    model = assign_measures(
        model,
        AssignConfig(
            measures_per_node=args.measures,
            overlap_probability=args.overlap,
            cost_sampler=_parse_cost_range(args.cost_range),
            seed=seed,
        ),
    )
    summary = (
        f"nodes: {len(model.graph.nodes)} ({_kind_counts(model)})\n"
        f"edges: {len(model.graph.edges)}\n"
        f"instances: {len(model.measures)}\n"
    )
    if args.out:
        save_model(model, args.out)
        sys.stdout.write(summary)
    else:
        sys.stdout.write(write_model(model))
        sys.stderr.write(summary)
    return EXIT_OK


def _summary_path(csv_path: str) -> Path:
    base = Path(csv_path)
    return base.with_name(base.stem + ".summary" + (base.suffix or ".csv"))


def _cmd_bench(args: argparse.Namespace) -> int:
    grid = BenchGrid(
        sizes=_parse_list(args.sizes, int, "sizes"),
        measure_counts=_parse_list(args.measures, int, "measures"),
        overlaps=_parse_list(args.overlaps, float, "overlaps"),
        trials=args.trials,
        seed=args.seed if args.seed is not None else _default_seed(),
        timeout_s=args.timeout,
        workers=args.workers,
    )
    records = run_benchmark(grid)
    csv_text = records_to_csv(records)
    summary_text = summarize(records)
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
        _summary_path(args.out).write_text(summary_text, encoding="utf-8")
        sys.stdout.write(summary_text)
    else:
        sys.stdout.write(csv_text)
        sys.stderr.write(summary_text)
    if records and not any(r.status == STATUS_OK for r in records):
        raise AnalysisError("no benchmark cell completed within the timeout")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="icsguard",
        description=(
            "Least-cost disruption analysis for AND/OR dependency graphs"
            " with overlapping protective measures."
        ),
        epilog=f"Set {SEED_ENV_VAR} to override default seeds.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser(
        "analyze", help="compute the cheapest disruption of a model file"
    )
    analyze.add_argument("model", help="model file to analyze")
    analyze.add_argument(
        "--format",
        choices=("text", "json", "dot"),
        default="text",
        help="report format (default text)",
    )
    analyze.add_argument(
        "--output", metavar="PATH", help="write the report here instead of stdout"
    )
    analyze.add_argument(
        "--check-oracle",
        action="store_true",
        help="cross-check the optimum against exhaustive enumeration (small models)",
    )
    analyze.add_argument(
        "--export-wcnf",
        metavar="PATH",
        help="also write the weighted CNF encoding to this file",
    )
    analyze.set_defaults(handler=_cmd_analyze)

    gen = commands.add_parser("gen", help="generate a pseudo-random model file")
    gen.add_argument("--size", type=int, required=True, help="number of graph nodes")
    gen.add_argument(
        "--config",
        default="60,20,20",
        metavar="AT,AND,OR",
        help="composition percentages (default 60,20,20)",
    )
    gen.add_argument(
        "--measures", type=int, default=0, help="measure rounds per atomic node"
    )
    gen.add_argument(
        "--overlap", type=float, default=0.0, help="probability of extending the previous instance"
    )
    gen.add_argument(
        "--cost-range",
        metavar="LO..HI",
        help="instance costs drawn uniformly from LO..HI (default: every instance costs 1)",
    )
    gen.add_argument("--seed", type=int, help="generator seed (default 1)")
    gen.add_argument("--out", metavar="PATH", help="write the model here instead of stdout")
    gen.set_defaults(handler=_cmd_gen)

    bench = commands.add_parser("bench", help="time the metric over a generated grid")
    bench.add_argument("--sizes", default="", help="comma-separated graph sizes")
    bench.add_argument("--measures", default="", help="comma-separated measure counts")
    bench.add_argument("--overlaps", default="", help="comma-separated overlap probabilities")
    bench.add_argument("--trials", type=int, default=1, help="repetitions per cell")
    bench.add_argument("--timeout", type=float, help="per-run solve deadline in seconds")
    bench.add_argument("--seed", type=int, help="grid seed (default 1)")
    bench.add_argument("--workers", type=int, default=1, help="parallel worker threads")
    bench.add_argument("--out", metavar="CSV", help="write rows here plus a .summary file")
    bench.set_defaults(handler=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AnalysisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except IcsguardError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
