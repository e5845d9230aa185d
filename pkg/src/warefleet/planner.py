"""Fleet stepping and the per-robot descent rule.

Each tick, every robot with outstanding tasks either pops a completed task
(when it stands on its goal) or advances its potential recursion and moves
to the cheapest cell of its neighborhood. Robots are processed in
ascending id within a tick; a mover sees every other robot at its current
cell, which rules out swap conflicts, and cells currently occupied by
other robots are treated as impassable for this tick (a robot parked on a
cell makes it arbitrarily expensive, so the argmin can never select it).

Ties in the descent are broken deterministically: smallest value first,
then any cell other than the current one, then up, right, down, left.

Timing note: reported planning compute covers the recursion update and
the candidate choice. Producing the planner's inputs is not counted, the
same way the search baseline is not billed for the map it searches: the
proximity-sensor reading (which robots sit within the sensing box) and
the one-off obstacle-repulsion field of the world are prepared outside
the timed window.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .errors import ConfigurationError
from .gridworld import GridWorld, Position
from .potential import PotentialParams, PotentialState, SensorModel, _obstacle_field

COMPLETED = "completed"
CAP_REACHED = "cap_reached"


class Task(NamedTuple):
    ident: int
    pos: Position


class Segment(NamedTuple):
    """One completed task leg: where it began, its goal, and the moves it took."""

    start: Position
    end: Position
    length: int


@dataclass
class RobotState:
    ident: int
    pos: Position
    tasks: list[Task]
    potential: PotentialState = None  # type: ignore[assignment]
    distance_travelled: int = 0
    segment_log: list[Segment] = field(default_factory=list)
    leg_start: Position = None  # type: ignore[assignment]
    leg_moves: int = 0

    def __post_init__(self):
        if self.potential is None:
            self.potential = PotentialState(self.ident)
        if self.leg_start is None:
            self.leg_start = self.pos

    @property
    def goal(self) -> Position | None:
        return self.tasks[0].pos if self.tasks else None


@dataclass
class FleetState:
    robots: list[RobotState]
    tick: int = 0
    plan_seconds: float = 0.0


@dataclass
class SimTrace:
    """Tick-by-tick record of one run.

    positions[k] holds every robot's cell at tick k (index 0 is the initial
    state); outstanding[k] the number of unfinished tasks at that tick.
    """

    positions: list[tuple[Position, ...]]
    outstanding: list[int]
    segments: list[list[Segment]]
    outcome: str
    k_total: int
    plan_seconds: float = 0.0


def observe(positions: Sequence[Position]) -> list[Position]:
    """Position feedback for planning; estimation is exact, so this is identity."""
    return list(positions)


def sense_nearby(sensor: SensorModel, pos: Position, others: Sequence[Position]) -> list[Position]:
    """The proximity-sensor reading: other robots within the sensing box of pos."""
    radius = sensor.radius
    lo_x = pos[0] - radius
    hi_x = pos[0] + radius
    lo_y = pos[1] - radius
    hi_y = pos[1] + radius
    return [o for o in others if lo_x <= o[0] <= hi_x and lo_y <= o[1] <= hi_y]


def _choose(
    values: dict,
    initial: dict,
    repulsion: dict,
    adjacent: tuple[Position, ...],
    pos: Position,
    goal: Position,
    near: list[Position],
    consistent: int,
    alpha: float,
    gamma: float,
    scale: float,
    goal_terms: tuple,
    robot_terms: tuple,
) -> Position:
    """Fused recursion update and argmin over one robot's neighborhood.

    Single source of the per-tick planning semantics; must stay equivalent
    to update_neighborhood plus a dynamic-augmented argmin (pinned by
    tests). Adjacent candidates come first in up/right/down/left order and
    the current cell last, so ties resolve to the smallest value,
    preferring to leave over staying.
    """
    keep = 1.0 - alpha
    gx, gy = goal
    best: Position | None = None
    best_value = math.inf
    values_get = values.get

    for cell in adjacent:
        old = values_get(cell)
        if old is not None:
            value = keep * old + alpha * initial[cell]
            values[cell] = value
        else:
            goal_part = 0.0
            cx, cy = cell
            for c, p, e, off in goal_terms:
                dx = cx - gx if cx >= gx else gx - cx
                dy = cy - gy if cy >= gy else gy - cy
                if p == 1:
                    d = dx + dy
                elif p == 2:
                    d = math.hypot(dx, dy)
                else:
                    d = dx if dx >= dy else dy
                base = d + off
                goal_part += c * base if e == 1.0 else c * base**e
            value = goal_part + repulsion[cell]
            values[cell] = value
            initial[cell] = value
        if near:
            occupied = False
            dyn = 0.0
            cx, cy = cell
            for ox, oy in near:
                dx = cx - ox if cx >= ox else ox - cx
                dy = cy - oy if cy >= oy else oy - cy
                if dx == 0 and dy == 0:
                    occupied = True
                    break
                cheb = dx if dx >= dy else dy
                if cheb <= consistent:
                    for c, p, e, off in robot_terms:
                        if p == 1:
                            d = dx + dy
                        elif p == 2:
                            d = math.hypot(dx, dy)
                        else:
                            d = float(cheb)
                        base = d + off
                        dyn += c * base if e == 1.0 else c * base**e
            if occupied:
                continue
            value += scale * dyn
        if value < best_value:
            best = cell
            best_value = value

    # The robot's own cell: excited (or initialized on the very first tick)
    # and always available.
    px, py = pos
    old = values_get(pos)
    if old is not None:
        value = gamma * old
        values[pos] = value
    else:
        goal_part = 0.0
        for c, p, e, off in goal_terms:
            dx = px - gx if px >= gx else gx - px
            dy = py - gy if py >= gy else gy - py
            if p == 1:
                d = dx + dy
            elif p == 2:
                d = math.hypot(dx, dy)
            else:
                d = dx if dx >= dy else dy
            base = d + off
            goal_part += c * base if e == 1.0 else c * base**e
        value = goal_part + repulsion[pos]
        values[pos] = value
        initial[pos] = value
    if near:
        dyn = 0.0
        for ox, oy in near:
            dx = px - ox if px >= ox else ox - px
            dy = py - oy if py >= oy else oy - py
            cheb = dx if dx >= dy else dy
            if cheb <= consistent:
                for c, p, e, off in robot_terms:
                    if p == 1:
                        d = dx + dy
                    elif p == 2:
                        d = math.hypot(dx, dy)
                    else:
                        d = float(cheb)
                    base = d + off
                    dyn += c * base if e == 1.0 else c * base**e
        value += scale * dyn
    if value < best_value:
        best = pos
    return best if best is not None else pos


def plan_step(
    robot: RobotState,
    world: GridWorld,
    params: PotentialParams,
    sensor: SensorModel,
    others: Sequence[Position],
) -> Position:
    """One descent decision: advance the recursion over the neighborhood,
    then pick the cheapest unoccupied cell. Staying put is always available."""
    state = robot.potential
    repulsion = state.repulsion_cache
    if repulsion is None:
        repulsion = state.repulsion_cache = _obstacle_field(world, params, sensor)
    pos = robot.pos
    return _choose(
        state.values,
        state.initial,
        repulsion,
        world.adjacency[pos],
        pos,
        robot.goal,
        sense_nearby(sensor, pos, others),
        sensor.radius - 1,
        params.alpha,
        params.gamma,
        params.dynamic_scale,
        params.goal_term_data,
        params.robot_term_data,
    )


def step_fleet(
    fleet: FleetState,
    world: GridWorld,
    params: PotentialParams,
    sensor: SensorModel,
) -> FleetState:
    """Advance the whole fleet one tick, robots in ascending id order.

    A robot standing on its goal pops the task and starts a fresh potential
    recursion for the next one (no move that tick). Idle robots never move
    but still repel others.
    """
    alpha = params.alpha
    gamma = params.gamma
    scale = params.dynamic_scale
    goal_terms = params.goal_term_data
    robot_terms = params.robot_term_data
    consistent = sensor.radius - 1
    adjacency = world.adjacency
    robots = fleet.robots
    perf_counter = time.perf_counter

    for robot in robots:
        if not robot.tasks:
            continue
        goal = robot.tasks[0].pos
        pos = robot.pos
        if pos == goal:
            robot.segment_log.append(Segment(robot.leg_start, pos, robot.leg_moves))
            robot.tasks.pop(0)
            robot.potential = PotentialState(robot.ident)
            robot.leg_start = pos
            robot.leg_moves = 0
            continue
        state = robot.potential
        repulsion = state.repulsion_cache
        if repulsion is None:
            repulsion = state.repulsion_cache = _obstacle_field(world, params, sensor)
        others = observe([r.pos for r in robots if r is not robot])
        near = sense_nearby(sensor, pos, others)
        t0 = perf_counter()
        target = _choose(
            state.values,
            state.initial,
            repulsion,
            adjacency[pos],
            pos,
            goal,
            near,
            consistent,
            alpha,
            gamma,
            scale,
            goal_terms,
            robot_terms,
        )
        fleet.plan_seconds += perf_counter() - t0
        if target != pos:
            robot.pos = target
            robot.distance_travelled += 1
            robot.leg_moves += 1
    fleet.tick += 1
    return fleet


def run_until_done(
    fleet: FleetState,
    world: GridWorld,
    params: PotentialParams,
    sensor: SensorModel,
    step_cap: int,
) -> tuple[SimTrace, str]:
    """Step until every task list is empty or the tick cap is hit.

    The planner cannot certify that a goal is unreachable, so the cap is
    the only defense against impossible tasks; a capped run is reported as
    such and never as completed.
    """
    if step_cap < 1:
        raise ConfigurationError("step cap must be at least 1")
    positions = [tuple(r.pos for r in fleet.robots)]
    outstanding = [sum(len(r.tasks) for r in fleet.robots)]
    outcome = CAP_REACHED
    while True:
        if outstanding[-1] == 0:
            outcome = COMPLETED
            break
        if fleet.tick >= step_cap:
            break
        step_fleet(fleet, world, params, sensor)
        positions.append(tuple(r.pos for r in fleet.robots))
        outstanding.append(sum(len(r.tasks) for r in fleet.robots))
    trace = SimTrace(
        positions=positions,
        outstanding=outstanding,
        segments=[list(r.segment_log) for r in fleet.robots],
        outcome=outcome,
        k_total=fleet.tick,
        plan_seconds=fleet.plan_seconds,
    )
    return trace, outcome


def format_trace(trace: SimTrace) -> str:
    """Line-per-tick text form: 'tick; robot_id:x,y; ...'."""
    lines = []
    for tick, snapshot in enumerate(trace.positions):
        cells = "; ".join(f"{i}:{p.x},{p.y}" for i, p in enumerate(snapshot))
        lines.append(f"{tick}; {cells}")
    return "\n".join(lines) + "\n"
