"""Grid-warehouse fleet simulator.

Deterministic discrete-time simulation of warehouse robots: a genetic
allocator hands task batches to a fleet, each robot plans locally over a
recursively excited/relaxed potential field, and an A* baseline provides
the optimal-distance references used by the benchmark metrics.
"""

from .allocator import (
    Chromosome,
    GAConfig,
    HeuristicStore,
    crossover,
    decode,
    encode,
    evolve,
    fitness,
    learn,
    mutate,
)
from .baseline import PathResult, optimal_sequence_distance, shortest_path
from .engine import (
    CellSummary,
    MetricsReport,
    Scenario,
    compute_metrics,
    run_scenario,
    run_sweep,
)
from .errors import (
    ConfigurationError,
    DomainError,
    LoadError,
    SimulatorError,
    ValidationError,
)
from .gridworld import (
    GridWorld,
    Position,
    adjacent_neighborhood,
    distance,
    generate_layout,
    generate_layout_sized,
    neighborhood,
    parse_layout,
    region_adjacent_neighborhood,
    serialize_layout,
)
from .planner import (
    FleetState,
    RobotState,
    Segment,
    SimTrace,
    Task,
    format_trace,
    plan_step,
    run_until_done,
    step_fleet,
)
from .potential import (
    PotentialParams,
    PotentialState,
    PotentialTerm,
    SensorModel,
    check_divergence_condition,
    dynamic_potential,
    excite,
    expected_potential,
    phi,
    phi_sensed,
    relax,
    static_potential_initial,
    update_neighborhood,
)

__version__ = "0.1.0"
