"""Potential-field mathematics for the local planner.

The scalar field a robot descends splits into a static part (goal
attraction plus sensed obstacle repulsion) and a dynamic part (repulsion
from the other robots' current cells). The static part is not a fixed
function of space: each robot re-evaluates its own copy recursively, every
tick multiplying the value under its wheels by an excitation factor gamma
and decaying the other cells of its neighborhood back toward their initial
values with a relaxation factor alpha. Standing still therefore inflates
the occupied cell until some neighbor looks cheaper, which is what destroys
local minima in finite time.

Sensing is modeled as a square (Chebyshev) window. A source only
contributes to the potential of cell s when it is visible from every cell
of the geometric step-neighborhood of s, so the value computed for s is
the same no matter which adjacent cell the robot evaluated it from.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field
from functools import cached_property

from .errors import ConfigurationError, DomainError
from .gridworld import GridWorld, Position, distance

GOAL = "goal"
OBSTACLE = "obstacle"
ROBOT = "robot"

_SOURCE_CLASSES = (GOAL, OBSTACLE, ROBOT)


@dataclass(frozen=True)
class PotentialTerm:
    """One weighted power of a p-norm distance: c * (d_p + offset) ** exponent."""

    coefficient: float
    norm_order: float
    exponent: float
    offset: float = 0.0


def _default_goal_terms() -> tuple[PotentialTerm, ...]:
    return (PotentialTerm(coefficient=1.0, norm_order=math.inf, exponent=1.0),)


def _default_repulsive_terms() -> tuple[PotentialTerm, ...]:
    return (PotentialTerm(coefficient=0.1, norm_order=2, exponent=-2.0, offset=1e-9),)


@dataclass(frozen=True)
class SensorModel:
    """Square proximity-sensing window with a Chebyshev radius in cells.

    Radius 2 is the minimum: the consistently-sensed region around a cell
    must still contain the cell's whole step-neighborhood.
    """

    radius: int = 3

    def __post_init__(self):
        if self.radius < 2:
            raise ConfigurationError("sensor radius must be at least 2")


@dataclass(frozen=True)
class PotentialParams:
    """Shape of the potential field plus the recursion factors.

    Defaults are the benchmark functions: goal attraction is the Chebyshev
    distance, obstacle repulsion 0.1*(d_2 + 1e-9)**-2, and other robots
    reuse the obstacle shape scaled by 0.01.
    """

    goal_terms: tuple[PotentialTerm, ...] = field(default_factory=_default_goal_terms)
    obstacle_terms: tuple[PotentialTerm, ...] = field(default_factory=_default_repulsive_terms)
    robot_terms: tuple[PotentialTerm, ...] = field(default_factory=_default_repulsive_terms)
    gamma: float = 15.0
    alpha: float = 0.05
    dynamic_scale: float = 0.01

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ConfigurationError(f"excitation factor must exceed 1, got {self.gamma}")
        if not 0.0 <= self.alpha < 1.0:
            raise ConfigurationError(f"relaxation factor must lie in [0, 1), got {self.alpha}")
        if self.dynamic_scale < 0.0:
            raise ConfigurationError("dynamic scale must be nonnegative")
        for term in self.goal_terms:
            if term.coefficient < 0 or term.offset < 0:
                raise ConfigurationError(f"invalid goal term {term}")
            if term.exponent < 0:
                raise ConfigurationError("goal terms must be non-decreasing in distance")
        for name, terms in ((OBSTACLE, self.obstacle_terms), (ROBOT, self.robot_terms)):
            for term in terms:
                if term.coefficient < 0 or term.offset < 0:
                    raise ConfigurationError(f"invalid {name} term {term}")
                if term.exponent > 0:
                    raise ConfigurationError(f"{name} terms must be non-increasing in distance")
                if name == ROBOT and term.coefficient != 0 and term.exponent < 0 and term.offset <= 0:
                    # Robots can share a distance of zero, so their repulsion
                    # must stay finite.
                    raise ConfigurationError("robot terms with negative exponent need offset > 0")

    def terms_for(self, source_class: str) -> tuple[PotentialTerm, ...]:
        if source_class == GOAL:
            return self.goal_terms
        if source_class == OBSTACLE:
            return self.obstacle_terms
        if source_class == ROBOT:
            return self.robot_terms
        raise ConfigurationError(f"unknown source class {source_class!r}; use one of {_SOURCE_CLASSES}")

    # Planner hot loops read the terms millions of times; plain tuples skip
    # the per-access dataclass attribute machinery.
    @cached_property
    def goal_term_data(self) -> tuple[tuple[float, float, float, float], ...]:
        return tuple((t.coefficient, t.norm_order, t.exponent, t.offset) for t in self.goal_terms)

    @cached_property
    def robot_term_data(self) -> tuple[tuple[float, float, float, float], ...]:
        return tuple((t.coefficient, t.norm_order, t.exponent, t.offset) for t in self.robot_terms)


class PotentialState:
    """Per-robot recursive store of static potentials for the active leg.

    Tracks, for every explored cell, the current recursive value and the
    initial value it relaxes back toward. A cell counts as explored exactly
    when it has a stored value. Lives as long as one task leg; the planner
    discards it when the goal changes.
    """

    __slots__ = ("owner", "values", "initial", "repulsion_cache")

    def __init__(self, owner: int):
        self.owner = owner
        self.values: dict[Position, float] = {}
        self.initial: dict[Position, float] = {}
        # Reference to the world-level obstacle repulsion memo; bound by the
        # planner on first use so the hot loop skips the registry lookup.
        self.repulsion_cache: dict[Position, float] | None = None

    @property
    def explored(self):
        """Set-like view of the cells explored so far."""
        return self.values.keys()


def phi(params: PotentialParams, source_class: str, at: Position, source: Position) -> float:
    """Unrestricted potential contribution of one source at one cell."""
    total = 0.0
    for term in params.terms_for(source_class):
        base = distance(at, source, term.norm_order) + term.offset
        if base == 0.0 and term.exponent < 0:
            raise DomainError(
                f"{source_class} potential undefined at distance 0 with zero offset"
            )
        total += term.coefficient * base ** term.exponent
    return total


def in_consistent_range(sensor: SensorModel, at: Position, source: Position) -> bool:
    """Whether the source is sensed from every cell of the step cross at `at`.

    Uses the full geometric cross (the cell plus its four lattice
    neighbors, obstacles included) so membership depends only on the two
    positions; any robot computes the same answer from any approach cell.
    The worst cross cell is one step farther than `at` itself.
    """
    dx = abs(at.x - source.x)
    dy = abs(at.y - source.y)
    return max(dx, dy) + 1 <= sensor.radius


def phi_sensed(
    params: PotentialParams,
    source_class: str,
    at: Position,
    source: Position,
    sensor: SensorModel,
) -> float:
    """Potential contribution restricted to consistently sensed sources."""
    if not in_consistent_range(sensor, at, source):
        return 0.0
    return phi(params, source_class, at, source)


# Obstacle repulsion depends only on the world geometry, the sensing radius
# and the obstacle terms, never on the robot, goal or tick, so the per-cell
# sums are computed once per world and shared by every run in the process.
_OBSTACLE_FIELDS: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()


def _obstacle_field(
    world: GridWorld, params: PotentialParams, sensor: SensorModel
) -> dict[Position, float]:
    per_world = _OBSTACLE_FIELDS.setdefault(world, {})
    key = (sensor.radius, params.obstacle_terms)
    cells = per_world.get(key)
    if cells is None:
        reach = sensor.radius - 1
        cells = {
            cell: sum(
                phi(params, OBSTACLE, cell, obstacle)
                for obstacle in world.obstacles_within(cell, reach)
            )
            for cell in sorted(world.reachable)
        }
        per_world[key] = cells
    return cells


def static_potential_initial(
    world: GridWorld,
    params: PotentialParams,
    sensor: SensorModel,
    cell: Position,
    goal: Position,
) -> float:
    """Initial static potential: goal attraction plus sensed obstacle repulsion."""
    return phi(params, GOAL, cell, goal) + _obstacle_field(world, params, sensor)[cell]


def excite(u_prev: float, gamma: float) -> float:
    """One excitation step: multiply the previous value by gamma."""
    return gamma * u_prev


def relax(u_prev: float, u_init: float, alpha: float) -> float:
    """One relaxation step: pull the previous value toward its initial value."""
    return (1.0 - alpha) * u_prev + alpha * u_init


def update_neighborhood(
    state: PotentialState,
    world: GridWorld,
    params: PotentialParams,
    sensor: SensorModel,
    robot_pos: Position,
    goal: Position,
) -> None:
    """Advance the recursion one tick over the robot's neighborhood.

    Cells seen for the first time are initialized from the static field
    and recorded as explored (no excitation or relaxation on that visit).
    Afterwards the occupied cell is excited and every other neighborhood
    cell relaxed toward its initial value. Cells outside the neighborhood
    are never touched.
    """
    values = state.values
    initial = state.initial
    alpha = params.alpha
    keep = 1.0 - alpha
    repulsion = _obstacle_field(world, params, sensor)
    for cell in (robot_pos, *world.adjacent(robot_pos)):
        if cell in values:
            if cell == robot_pos:
                values[cell] = params.gamma * values[cell]
            else:
                values[cell] = keep * values[cell] + alpha * initial[cell]
        else:
            u = phi(params, GOAL, cell, goal) + repulsion[cell]
            values[cell] = u
            initial[cell] = u


def dynamic_potential(
    params: PotentialParams,
    sensor: SensorModel,
    at: Position,
    others: list[Position],
) -> float:
    """Scaled repulsion from every other robot within consistent sensing."""
    total = 0.0
    for other in others:
        if in_consistent_range(sensor, at, other):
            total += phi(params, ROBOT, at, other)
    return params.dynamic_scale * total


def check_divergence_condition(p: float, gamma: float, alpha: float) -> bool:
    """Classify the excite/relax recursion for an occupancy frequency p.

    The expected value of the recursion evolves with ratio
    beta = p*gamma + (1-p)*(1-alpha); it diverges exactly when beta > 1,
    equivalently gamma > 1 - alpha + alpha/p. Returns True for divergent.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"occupancy frequency must lie in (0, 1), got {p}")
    beta = p * gamma + (1.0 - p) * (1.0 - alpha)
    return beta > 1.0


def expected_potential(steps: int, p: float, gamma: float, alpha: float, u_init: float) -> float:
    """Closed-form mean of the recursion after `steps` random excite/relax ticks."""
    beta = p * gamma + (1.0 - p) * (1.0 - alpha)
    geometric = sum(beta**i for i in range(steps))
    return (beta**steps + (1.0 - p) * alpha * geometric) * u_init
