"""Scenario orchestration and the J1..J4 benchmark metrics.

A scenario run wires the subsystems together the way the deployed system
would: the central allocator evolves a task assignment, robots plan and
move distributively, and every completed leg's realized distance feeds
back into the allocator's heuristic store. Position feedback is exact and
the server/robot channel is lossless, so both are direct calls here.

Metrics:
  J1  total realized distance over total optimal (A*) distance
  J2  average travel distance per robot per task
  J3  longest per-robot travel distance per task (the completion bottleneck)
  J4  tasks completed per tick
"""

from __future__ import annotations

import random
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .allocator import GAConfig, HeuristicStore, decode, evolve
from .baseline import shortest_path
from .errors import ConfigurationError
from .gridworld import GridWorld, Position
from .planner import (
    CAP_REACHED,
    FleetState,
    RobotState,
    SimTrace,
    Task,
    run_until_done,
)
from .potential import PotentialParams, SensorModel, _obstacle_field


@dataclass
class Scenario:
    """Full description of one reproducible run."""

    world: GridWorld
    n_robots: int
    n_tasks: int
    robot_starts: tuple[Position, ...] | None = None
    task_positions: tuple[Position, ...] | None = None
    potential: PotentialParams = field(default_factory=PotentialParams)
    sensor: SensorModel = field(default_factory=SensorModel)
    ga: GAConfig = field(default_factory=GAConfig)
    eta: float = 0.5
    step_cap: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_robots < 1 or self.n_tasks < 1:
            raise ConfigurationError("need at least one robot and one task")
        if self.step_cap is not None and self.step_cap < 1:
            raise ConfigurationError("step cap must be positive")
        for label, cells, expected in (
            ("robot start", self.robot_starts, self.n_robots),
            ("task position", self.task_positions, self.n_tasks),
        ):
            if cells is None:
                continue
            if len(cells) != expected:
                raise ConfigurationError(f"expected {expected} {label}s, got {len(cells)}")
            if len(set(cells)) != len(cells):
                raise ConfigurationError(f"{label}s must be pairwise distinct")
            for cell in cells:
                if cell not in self.world.reachable:
                    raise ConfigurationError(f"{label} {cell} is not a reachable cell")


@dataclass
class MetricsReport:
    n_robots: int
    n_tasks: int
    j1: float
    j2: float
    j3: float
    j4: float
    k_total: int
    per_robot: list[tuple[int, int]]
    completed_tasks: int
    cap_reached: bool
    seed: int = 0
    planner_seconds: float = 0.0
    astar_seconds: float = 0.0
    ga_history: tuple[float, ...] = ()


METRICS_COLUMNS = (
    "N",
    "K",
    "seed",
    "J1",
    "J2",
    "J3",
    "J4",
    "k_total",
    "planner_time_us",
    "astar_time_us",
    "cap_reached",
)


def metrics_row(report: MetricsReport) -> list:
    """One CSV row in the fixed column order; floats keep full precision."""
    return [
        report.n_robots,
        report.n_tasks,
        report.seed,
        repr(report.j1),
        repr(report.j2),
        repr(report.j3),
        repr(report.j4),
        report.k_total,
        int(round(report.planner_seconds * 1e6)),
        int(round(report.astar_seconds * 1e6)),
        int(report.cap_reached),
    ]


def default_step_cap(world: GridWorld, n_robots: int, n_tasks: int) -> int:
    per_robot = -(-n_tasks // n_robots)
    return 50 * (world.width + world.height) * max(1, per_robot)


def _resolve_placements(
    sc: Scenario, rng: random.Random
) -> tuple[list[Position], list[Position]]:
    """Explicit cells when given, otherwise uniform draws without replacement.

    Random starts and tasks are drawn from one no-replacement sample, so all
    placed cells are distinct from each other.
    """
    starts = list(sc.robot_starts) if sc.robot_starts is not None else None
    tasks = list(sc.task_positions) if sc.task_positions is not None else None
    if starts is not None and tasks is not None:
        return starts, tasks
    pool = sorted(sc.world.reachable)
    taken = set(starts or []) | set(tasks or [])
    if taken:
        pool = [cell for cell in pool if cell not in taken]
    needed = (sc.n_robots if starts is None else 0) + (sc.n_tasks if tasks is None else 0)
    if needed > len(pool):
        raise ConfigurationError(
            f"layout has only {len(pool)} free cells for {needed} random placements"
        )
    drawn = rng.sample(pool, needed)
    if starts is None:
        starts = drawn[: sc.n_robots]
        drawn = drawn[sc.n_robots :]
    if tasks is None:
        tasks = drawn
    return starts, tasks


def compute_metrics(trace: SimTrace, optima: list[int], n_tasks: int) -> MetricsReport:
    """J1..J4 from a trace's completed legs and the matching optimal lengths.

    Capped runs only contribute their completed legs; the flag is carried
    through so aggregation can exclude them where a full-run comparison is
    meaningless.
    """
    realized = [sum(seg.length for seg in segs) for segs in trace.segments]
    n_robots = len(trace.segments)
    sum_d = sum(realized)
    sum_opt = sum(optima)
    if sum_opt == 0:
        j1 = 1.0 if sum_d == 0 else float("inf")
    else:
        j1 = sum_d / sum_opt
    j2 = sum_d / (n_tasks * n_robots)
    j3 = max(realized) / n_tasks
    completed = sum(len(segs) for segs in trace.segments)
    j4 = completed / trace.k_total if trace.k_total > 0 else 0.0
    return MetricsReport(
        n_robots=n_robots,
        n_tasks=n_tasks,
        j1=j1,
        j2=j2,
        j3=j3,
        j4=j4,
        k_total=trace.k_total,
        per_robot=list(zip(realized, optima)),
        completed_tasks=completed,
        cap_reached=trace.outcome == CAP_REACHED,
    )


def run_scenario(
    sc: Scenario, heuristics: HeuristicStore | None = None
) -> tuple[SimTrace, MetricsReport]:
    """Allocate, simulate, learn, measure. Deterministic for a fixed scenario.

    A shared heuristic store may be passed in to carry learning across runs;
    by default each run starts cold with 1-norm estimates.
    """
    rng = random.Random(sc.seed)
    starts, task_cells = _resolve_placements(sc, rng)
    store = heuristics if heuristics is not None else HeuristicStore(sc.eta)
    task_map = {index + 1: pos for index, pos in enumerate(task_cells)}

    ga_cfg = replace(sc.ga, rng_seed=rng.randrange(2**32))
    best, history = evolve(ga_cfg, starts, task_map, store)
    allocation = decode(best, sc.n_robots)

    robots = [
        RobotState(ident=i, pos=starts[i], tasks=[Task(t, task_map[t]) for t in allocation[i]])
        for i in range(sc.n_robots)
    ]
    fleet = FleetState(robots=robots)
    cap = sc.step_cap or default_step_cap(sc.world, sc.n_robots, sc.n_tasks)
    # World preprocessing, analogous to the adjacency map the search
    # baseline uses: not part of per-tick planning compute.
    _obstacle_field(sc.world, sc.potential, sc.sensor)
    trace, _ = run_until_done(fleet, sc.world, sc.potential, sc.sensor, cap)

    astar_seconds = 0.0
    optima = []
    for segments in trace.segments:
        total = 0
        for seg in segments:
            leg = shortest_path(sc.world, seg.start, seg.end)
            astar_seconds += leg.elapsed
            total += leg.length  # a completed leg always has a path
        optima.append(total)

    # Realized distances feed the allocator's heuristics for later runs.
    for segments in trace.segments:
        for seg in segments:
            store.learn(seg.start, seg.end, seg.length, received=True)

    report = compute_metrics(trace, optima, sc.n_tasks)
    report.seed = sc.seed
    report.planner_seconds = trace.plan_seconds
    report.astar_seconds = astar_seconds
    report.ga_history = tuple(history)
    return trace, report


@dataclass
class CellSummary:
    """Mean/spread of each metric over the seeds of one (N, K) sweep cell.

    J1 is aggregated over completed runs only; a capped run has no defined
    optimal-distance comparison.
    """

    n_robots: int
    n_tasks: int
    runs: int
    completed_runs: int
    mean_j1: float
    std_j1: float
    mean_j2: float
    std_j2: float
    mean_j3: float
    std_j3: float
    mean_j4: float
    std_j4: float
    mean_k_total: float
    planner_seconds: float
    astar_seconds: float


SUMMARY_COLUMNS = (
    "N",
    "K",
    "runs",
    "completed_runs",
    "mean_J1",
    "std_J1",
    "mean_J2",
    "std_J2",
    "mean_J3",
    "std_J3",
    "mean_J4",
    "std_J4",
    "mean_k_total",
    "planner_time_us",
    "astar_time_us",
)


def summary_row(cell: CellSummary) -> list:
    return [
        cell.n_robots,
        cell.n_tasks,
        cell.runs,
        cell.completed_runs,
        repr(cell.mean_j1),
        repr(cell.std_j1),
        repr(cell.mean_j2),
        repr(cell.std_j2),
        repr(cell.mean_j3),
        repr(cell.std_j3),
        repr(cell.mean_j4),
        repr(cell.std_j4),
        repr(cell.mean_k_total),
        int(round(cell.planner_seconds * 1e6)),
        int(round(cell.astar_seconds * 1e6)),
    ]


def _sweep_cell_scenario(base: Scenario, n: int, k: int, seed: int) -> Scenario:
    # Sweeps vary N and K, so placements are always drawn fresh per seed.
    return replace(
        base, n_robots=n, n_tasks=k, seed=seed, robot_starts=None, task_positions=None
    )


def _sweep_worker(payload: tuple[Scenario, int, int, int]) -> tuple[int, int, int, MetricsReport]:
    base, n, k, seed = payload
    _, report = run_scenario(_sweep_cell_scenario(base, n, k, seed))
    return n, k, seed, report


def _summarize_cell(n: int, k: int, reports: list[MetricsReport]) -> CellSummary:
    completed = [r for r in reports if not r.cap_reached]
    j1_values = [r.j1 for r in completed] or [float("nan")]
    return CellSummary(
        n_robots=n,
        n_tasks=k,
        runs=len(reports),
        completed_runs=len(completed),
        mean_j1=statistics.fmean(j1_values),
        std_j1=statistics.pstdev(j1_values) if len(j1_values) > 1 else 0.0,
        mean_j2=statistics.fmean(r.j2 for r in reports),
        std_j2=statistics.pstdev([r.j2 for r in reports]) if len(reports) > 1 else 0.0,
        mean_j3=statistics.fmean(r.j3 for r in reports),
        std_j3=statistics.pstdev([r.j3 for r in reports]) if len(reports) > 1 else 0.0,
        mean_j4=statistics.fmean(r.j4 for r in reports),
        std_j4=statistics.pstdev([r.j4 for r in reports]) if len(reports) > 1 else 0.0,
        mean_k_total=statistics.fmean(r.k_total for r in reports),
        planner_seconds=sum(r.planner_seconds for r in reports),
        astar_seconds=sum(r.astar_seconds for r in reports),
    )


def run_sweep(
    base: Scenario,
    n_values: list[int],
    k_values: list[int],
    seeds_per_cell: int,
    warm: bool = False,
    jobs: int = 1,
) -> tuple[list[MetricsReport], list[CellSummary]]:
    """Run every (N, K, seed) combination and aggregate per cell.

    Cold mode (default) gives every run a fresh heuristic store, so runs are
    independent trials and may execute in parallel. Warm mode threads one
    store through the runs in order and is therefore always serial.
    """
    if seeds_per_cell < 1:
        raise ConfigurationError("need at least one seed per cell")
    seeds = [base.seed + i for i in range(seeds_per_cell)]
    combos = [(n, k, seed) for n in n_values for k in k_values for seed in seeds]

    reports: dict[tuple[int, int, int], MetricsReport] = {}
    if warm or jobs <= 1:
        store = HeuristicStore(base.eta) if warm else None
        for n, k, seed in combos:
            _, report = run_scenario(_sweep_cell_scenario(base, n, k, seed), heuristics=store)
            reports[(n, k, seed)] = report
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for n, k, seed, report in pool.map(
                _sweep_worker, [(base, n, k, seed) for n, k, seed in combos]
            ):
                reports[(n, k, seed)] = report

    ordered = [reports[combo] for combo in combos]
    cells = [
        _summarize_cell(n, k, [reports[(n, k, seed)] for seed in seeds])
        for n in n_values
        for k in k_values
    ]
    return ordered, cells
