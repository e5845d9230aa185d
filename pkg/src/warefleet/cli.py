"""Command-line front end.

Subcommands:
  run            execute one scenario and write its metrics
  sweep          run an (N, K, seed) grid and write per-run plus summary CSV
  compare-astar  per-seed planner compute vs A* compute for the same legs
  dump-trace     execute one scenario and write the tick-by-tick trace
  gen-layout     write a tiled warehouse layout document

Scenario files are flat `key = value` text with `#` comments. Position
lists are flat comma-separated integers taken in x,y pairs, e.g.
`robot_starts = 1,1, 5,9`. A `layout` value is either `generate:WIDTHxHEIGHT`
or the path of a layout document, resolved relative to the scenario file.
All outputs are written atomically (temp file, then rename).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from .allocator import GAConfig
from .engine import (
    METRICS_COLUMNS,
    SUMMARY_COLUMNS,
    MetricsReport,
    Scenario,
    metrics_row,
    run_scenario,
    run_sweep,
    summary_row,
)
from .errors import ConfigurationError, LoadError, SimulatorError
from .gridworld import Position, generate_layout_sized, parse_layout, serialize_layout
from .planner import format_trace
from .potential import PotentialParams, SensorModel

_SCENARIO_KEYS = {
    "layout",
    "n_robots",
    "n_tasks",
    "gamma",
    "alpha",
    "sensor_radius",
    "population",
    "generations",
    "mutation_prob",
    "eta",
    "step_cap",
    "seed",
    "robot_starts",
    "task_positions",
}


def _atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    handle, tmp_name = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(handle, "w", encoding="utf-8", newline="") as tmp:
            tmp.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def _csv_text(columns, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buffer.getvalue()


def _parse_positions(raw: str, key: str) -> tuple[Position, ...]:
    parts = [piece.strip() for piece in raw.split(",") if piece.strip()]
    try:
        numbers = [int(piece) for piece in parts]
    except ValueError as exc:
        raise LoadError(f"{key}: positions must be integers, got {raw!r}") from exc
    if len(numbers) % 2 != 0:
        raise LoadError(f"{key}: odd number of coordinates in {raw!r}")
    return tuple(Position(numbers[i], numbers[i + 1]) for i in range(0, len(numbers), 2))


def read_scenario_file(path: str | Path) -> dict[str, str]:
    """Read the flat key=value scenario document into a string map."""
    path = Path(path)
    values: dict[str, str] = {}
    for lineno, raw_line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise LoadError("expected 'key = value'", line=lineno)
        key, value = (piece.strip() for piece in line.split("=", 1))
        if key not in _SCENARIO_KEYS:
            raise LoadError(f"unknown scenario key {key!r}", line=lineno)
        if key in values:
            raise LoadError(f"duplicate scenario key {key!r}", line=lineno)
        values[key] = value
    return values


def build_scenario(path: str | Path, seed_override: int | None = None) -> Scenario:
    """Load a scenario document, resolving its layout and applying defaults."""
    path = Path(path)
    values = read_scenario_file(path)

    layout_value = values.get("layout")
    if layout_value is None:
        raise LoadError("scenario is missing the 'layout' key")
    if layout_value.startswith("generate:"):
        size = layout_value[len("generate:") :]
        try:
            width_text, height_text = size.lower().split("x", 1)
            width, height = int(width_text), int(height_text)
        except ValueError as exc:
            raise LoadError(f"layout: expected generate:WIDTHxHEIGHT, got {layout_value!r}") from exc
        world = generate_layout_sized(width, height)
    else:
        layout_path = Path(layout_value)
        if not layout_path.is_absolute():
            layout_path = path.parent / layout_path
        world = parse_layout(layout_path.read_text(encoding="utf-8"))

    def integer(key: str, default: int) -> int:
        return int(values[key]) if key in values else default

    def floating(key: str, default: float) -> float:
        return float(values[key]) if key in values else default

    potential = PotentialParams(gamma=floating("gamma", 15.0), alpha=floating("alpha", 0.05))
    sensor = SensorModel(radius=integer("sensor_radius", 3))
    ga = GAConfig(
        population_size=integer("population", 100),
        max_generations=integer("generations", 200),
        mutation_probability=floating("mutation_prob", 0.2),
    )
    starts = _parse_positions(values["robot_starts"], "robot_starts") if "robot_starts" in values else None
    tasks = _parse_positions(values["task_positions"], "task_positions") if "task_positions" in values else None
    step_cap = integer("step_cap", 0) or None
    seed = seed_override if seed_override is not None else integer("seed", 0)

    return Scenario(
        world=world,
        n_robots=integer("n_robots", 1),
        n_tasks=integer("n_tasks", 1),
        robot_starts=starts,
        task_positions=tasks,
        potential=potential,
        sensor=sensor,
        ga=ga,
        eta=floating("eta", 0.5),
        step_cap=step_cap,
        seed=seed,
    )


def _report_json(report: MetricsReport) -> dict:
    return {
        "n_robots": report.n_robots,
        "n_tasks": report.n_tasks,
        "seed": report.seed,
        "j1": report.j1,
        "j2": report.j2,
        "j3": report.j3,
        "j4": report.j4,
        "k_total": report.k_total,
        "per_robot": [list(pair) for pair in report.per_robot],
        "completed_tasks": report.completed_tasks,
        "cap_reached": report.cap_reached,
        "planner_time_us": int(round(report.planner_seconds * 1e6)),
        "astar_time_us": int(round(report.astar_seconds * 1e6)),
    }


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = build_scenario(args.scenario, args.seed)
    trace, report = run_scenario(scenario)
    if args.format == "json":
        _atomic_write(args.out, json.dumps(_report_json(report), indent=2) + "\n")
    else:
        _atomic_write(args.out, _csv_text(METRICS_COLUMNS, [metrics_row(report)]))
    if args.trace:
        _atomic_write(args.trace, format_trace(trace))
    if args.ga_history:
        rows = [(generation, repr(best)) for generation, best in enumerate(report.ga_history)]
        _atomic_write(args.ga_history, _csv_text(("generation", "best_fitness"), rows))
    return 0


def _parse_int_list(raw: str, flag: str) -> list[int]:
    try:
        return [int(piece) for piece in raw.split(",") if piece.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"{flag}: expected comma-separated integers, got {raw!r}") from exc


def _cmd_sweep(args: argparse.Namespace) -> int:
    base = build_scenario(args.scenario, args.seed)
    n_values = _parse_int_list(args.n_values, "--n-values")
    k_values = _parse_int_list(args.k_values, "--k-values")
    reports, cells = run_sweep(
        base, n_values, k_values, args.seeds, warm=args.warm, jobs=args.jobs
    )
    _atomic_write(args.out, _csv_text(METRICS_COLUMNS, [metrics_row(r) for r in reports]))
    if args.summary:
        _atomic_write(args.summary, _csv_text(SUMMARY_COLUMNS, [summary_row(c) for c in cells]))
    return 0


def _cmd_compare_astar(args: argparse.Namespace) -> int:
    base = build_scenario(args.scenario, args.seed)
    rows = []
    for offset in range(args.seeds):
        scenario = replace(base, seed=base.seed + offset)
        _, report = run_scenario(scenario)
        planner_us = int(round(report.planner_seconds * 1e6))
        astar_us = int(round(report.astar_seconds * 1e6))
        speedup = report.astar_seconds / report.planner_seconds if report.planner_seconds else 0.0
        rows.append([scenario.seed, planner_us, astar_us, repr(speedup)])
    _atomic_write(
        args.out, _csv_text(("seed", "planner_time_us", "astar_time_us", "astar_over_planner"), rows)
    )
    return 0


def _cmd_dump_trace(args: argparse.Namespace) -> int:
    scenario = build_scenario(args.scenario, args.seed)
    trace, _ = run_scenario(scenario)
    _atomic_write(args.out, format_trace(trace))
    return 0


def _cmd_gen_layout(args: argparse.Namespace) -> int:
    world = generate_layout_sized(
        args.width,
        args.height,
        shelf_width=args.shelf_width,
        shelf_height=args.shelf_height,
        aisle=args.aisle,
    )
    _atomic_write(args.out, serialize_layout(world))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="warefleet", description="Grid-warehouse fleet simulator and benchmark harness"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute one scenario")
    run.add_argument("--scenario", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--seed", type=int, default=None, help="override the file's seed")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--trace", default=None, help="also write the trace here")
    run.add_argument("--ga-history", default=None, help="also write per-generation best fitness")
    run.set_defaults(handler=_cmd_run)

    sweep = sub.add_parser("sweep", help="run an (N, K, seed) grid")
    sweep.add_argument("--scenario", required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--n-values", required=True)
    sweep.add_argument("--k-values", required=True)
    sweep.add_argument("--seeds", type=int, default=1)
    sweep.add_argument("--seed", type=int, default=None)
    sweep.add_argument("--summary", default=None, help="also write per-cell mean/std rows")
    sweep.add_argument("--warm", action="store_true", help="share learned heuristics across runs")
    sweep.add_argument("--jobs", type=int, default=1)
    sweep.set_defaults(handler=_cmd_sweep)

    cmp_cmd = sub.add_parser("compare-astar", help="planner vs A* compute per seed")
    cmp_cmd.add_argument("--scenario", required=True)
    cmp_cmd.add_argument("--out", required=True)
    cmp_cmd.add_argument("--seeds", type=int, default=1)
    cmp_cmd.add_argument("--seed", type=int, default=None)
    cmp_cmd.set_defaults(handler=_cmd_compare_astar)

    dump = sub.add_parser("dump-trace", help="write the tick-by-tick trace of a run")
    dump.add_argument("--scenario", required=True)
    dump.add_argument("--out", required=True)
    dump.add_argument("--seed", type=int, default=None)
    dump.set_defaults(handler=_cmd_dump_trace)

    gen = sub.add_parser("gen-layout", help="write a tiled warehouse layout")
    gen.add_argument("--width", type=int, required=True)
    gen.add_argument("--height", type=int, required=True)
    gen.add_argument("--shelf-width", type=int, default=2)
    gen.add_argument("--shelf-height", type=int, default=4)
    gen.add_argument("--aisle", type=int, default=2)
    gen.add_argument("--out", required=True)
    gen.set_defaults(handler=_cmd_gen_layout)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except SimulatorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
