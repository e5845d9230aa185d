"""Discrete warehouse world model.

Cells live on an integer lattice with the origin at the top-left of the
serialized document (x grows rightward, y downward). Every cell is either
an obstacle (walls, shelving) or reachable floor. Motion is 4-connected:
the neighborhood of a cell is the closed unit ball of the 1-norm, so a
robot may step up/right/down/left or stay. Layouts can be generated in a
tiled shelf-block pattern or parsed from a plain ASCII document.
"""

from __future__ import annotations

import math
from typing import Iterable, NamedTuple

from .errors import ConfigurationError, DomainError, LoadError


class Position(NamedTuple):
    x: int
    y: int


# Step offsets in deterministic preference order: up, right, down, left.
ADJACENT_STEPS = ((0, -1), (1, 0), (0, 1), (-1, 0))

OBSTACLE_GLYPH = "#"
FLOOR_GLYPH = "."


def distance(a: Position, b: Position, p: float) -> float:
    """p-norm distance between two cells for p in {1, 2, inf}."""
    dx = abs(a[0] - b[0])
    dy = abs(a[1] - b[1])
    if p == 1:
        return float(dx + dy)
    if p == 2:
        return math.hypot(dx, dy)
    if p == math.inf:
        return float(max(dx, dy))
    raise ConfigurationError(f"unsupported norm order {p!r}; use 1, 2 or math.inf")


class GridWorld:
    """Rectangular lattice partitioned into reachable floor and obstacles.

    Immutable after construction apart from internal lookup caches, so a
    single instance can back any number of simulation runs. Construction
    enforces that obstacles and floor exactly cover the lattice and that
    every boundary cell is a wall.
    """

    __slots__ = (
        "width",
        "height",
        "obstacles",
        "reachable",
        "adjacency",
        "_obstacle_boxes",
        "_hash",
        "__weakref__",
    )

    def __init__(self, width: int, height: int, obstacles: Iterable[Position]):
        if width < 3 or height < 3:
            raise ConfigurationError(f"grid {width}x{height} too small to hold walls and floor")
        self.width = width
        self.height = height
        self.obstacles = frozenset(Position(x, y) for x, y in obstacles)
        for pos in self.obstacles:
            if not (0 <= pos.x < width and 0 <= pos.y < height):
                raise ConfigurationError(f"obstacle {pos} outside the {width}x{height} lattice")
        for x in range(width):
            for y in (0, height - 1):
                if Position(x, y) not in self.obstacles:
                    raise ConfigurationError(f"boundary cell ({x},{y}) is not a wall")
        for y in range(height):
            for x in (0, width - 1):
                if Position(x, y) not in self.obstacles:
                    raise ConfigurationError(f"boundary cell ({x},{y}) is not a wall")
        self.reachable = frozenset(
            Position(x, y)
            for y in range(height)
            for x in range(width)
            if Position(x, y) not in self.obstacles
        )
        # Reachable 4-neighbors per cell in up/right/down/left order; the
        # planner and the search baseline read this dict directly in their
        # inner loops.
        self.adjacency: dict[Position, tuple[Position, ...]] = {
            cell: tuple(
                Position(cell.x + dx, cell.y + dy)
                for dx, dy in ADJACENT_STEPS
                if Position(cell.x + dx, cell.y + dy) in self.reachable
            )
            for cell in self.reachable
        }
        self._obstacle_boxes: dict[int, dict[Position, tuple[Position, ...]]] = {}
        self._hash = hash((self.width, self.height, self.obstacles))

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, GridWorld):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.obstacles == other.obstacles
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"GridWorld({self.width}x{self.height}, {len(self.obstacles)} obstacles)"

    def is_reachable(self, pos: Position) -> bool:
        return pos in self.reachable

    def adjacent(self, pos: Position) -> tuple[Position, ...]:
        """Reachable 4-neighbors of a reachable cell, in up/right/down/left order."""
        try:
            return self.adjacency[pos]
        except KeyError:
            raise DomainError(f"{pos} is not a reachable cell") from None

    def obstacles_within(self, center: Position, radius: int) -> tuple[Position, ...]:
        """Obstacles inside the Chebyshev box of the given radius around a cell.

        Memoized per radius; the cache is the only mutation after
        construction and is idempotent, so shared read-mostly use stays safe.
        """
        per_cell = self._obstacle_boxes.setdefault(radius, {})
        cached = per_cell.get(center)
        if cached is None:
            cached = tuple(
                Position(x, y)
                for y in range(center.y - radius, center.y + radius + 1)
                for x in range(center.x - radius, center.x + radius + 1)
                if Position(x, y) in self.obstacles
            )
            per_cell[center] = cached
        return cached

    def connected(self) -> bool:
        """True when every reachable cell sits in one flood-fill component."""
        if not self.reachable:
            return True
        start = next(iter(self.reachable))
        seen = {start}
        frontier = [start]
        while frontier:
            cell = frontier.pop()
            for nxt in self.adjacency[cell]:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return len(seen) == len(self.reachable)


def neighborhood(world: GridWorld, pos: Position) -> set[Position]:
    """The cell itself plus its reachable 4-neighbors (unit 1-norm ball)."""
    if pos not in world.reachable:
        raise DomainError(f"{pos} is not a reachable cell")
    return {pos, *world.adjacent(pos)}


def adjacent_neighborhood(world: GridWorld, pos: Position) -> set[Position]:
    """Reachable 4-neighbors of a cell, excluding the cell itself."""
    if pos not in world.reachable:
        raise DomainError(f"{pos} is not a reachable cell")
    return set(world.adjacent(pos))


def region_adjacent_neighborhood(world: GridWorld, region: Iterable[Position]) -> set[Position]:
    """Reachable cells at 1-norm distance exactly 1 from a region of cells."""
    cells = set(region)
    out: set[Position] = set()
    for cell in cells:
        if cell not in world.reachable:
            raise DomainError(f"{cell} is not a reachable cell")
        for nxt in world.adjacent(cell):
            if nxt not in cells:
                out.add(nxt)
    return out


def _tile_obstacles(
    width: int,
    height: int,
    shelf_width: int,
    shelf_height: int,
    aisle: int,
) -> set[Position]:
    """Walls plus shelf blocks tiled from the top-left with aisle-wide gaps.

    Blocks are placed at fixed offsets while a full block still leaves at
    least one aisle before the far wall; any remainder widens the trailing
    corridors instead of truncating a block.
    """
    obstacles = {Position(x, 0) for x in range(width)}
    obstacles |= {Position(x, height - 1) for x in range(width)}
    obstacles |= {Position(0, y) for y in range(height)}
    obstacles |= {Position(width - 1, y) for y in range(height)}

    x0 = 1 + aisle
    while x0 + shelf_width + aisle <= width - 1:
        y0 = 1 + aisle
        while y0 + shelf_height + aisle <= height - 1:
            for x in range(x0, x0 + shelf_width):
                for y in range(y0, y0 + shelf_height):
                    obstacles.add(Position(x, y))
            y0 += shelf_height + aisle
        x0 += shelf_width + aisle
    return obstacles


def _validated_layout(world: GridWorld) -> GridWorld:
    if not world.connected():
        raise ConfigurationError("generated layout is not a single connected floor")
    return world


def generate_layout(
    shelf_block_rows: int,
    shelf_block_cols: int,
    *,
    shelf_width: int = 2,
    shelf_height: int = 4,
    aisle: int = 2,
) -> GridWorld:
    """Deterministic tiled warehouse: walls, shelf blocks, aisle corridors.

    Dimensions follow from the block counts: each axis holds the requested
    number of blocks with an aisle between consecutive blocks and between
    blocks and the walls.
    """
    if shelf_block_rows < 1 or shelf_block_cols < 1:
        raise ConfigurationError("need at least one shelf block per axis")
    if shelf_width < 1 or shelf_height < 1 or aisle < 1:
        raise ConfigurationError("shelf and aisle dimensions must be positive")
    width = 2 + aisle + shelf_block_cols * (shelf_width + aisle)
    height = 2 + aisle + shelf_block_rows * (shelf_height + aisle)
    world = GridWorld(width, height, _tile_obstacles(width, height, shelf_width, shelf_height, aisle))
    return _validated_layout(world)


def generate_layout_sized(
    width: int,
    height: int,
    *,
    shelf_width: int = 2,
    shelf_height: int = 4,
    aisle: int = 2,
) -> GridWorld:
    """Tiled warehouse of an exact overall size.

    Fits as many whole shelf blocks as the requested dimensions allow; when
    the size is not an exact multiple of the tile pitch the right/bottom
    corridors absorb the remainder.
    """
    if shelf_width < 1 or shelf_height < 1 or aisle < 1:
        raise ConfigurationError("shelf and aisle dimensions must be positive")
    if width < 2 + aisle or height < 2 + aisle:
        raise ConfigurationError(f"{width}x{height} leaves no room for an aisle")
    world = GridWorld(width, height, _tile_obstacles(width, height, shelf_width, shelf_height, aisle))
    return _validated_layout(world)


def parse_layout(text: str) -> GridWorld:
    """Parse the ASCII layout document ('#' wall/shelf, '.' floor)."""
    lines = text.splitlines()
    while lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise LoadError("layout document is empty")
    width = len(lines[0])
    obstacles: set[Position] = set()
    for row, line in enumerate(lines):
        if len(line) != width:
            raise LoadError(
                f"ragged row: expected {width} characters, got {len(line)}", line=row + 1
            )
        for col, glyph in enumerate(line):
            if glyph == OBSTACLE_GLYPH:
                obstacles.add(Position(col, row))
            elif glyph != FLOOR_GLYPH:
                raise LoadError(f"unknown glyph {glyph!r}", line=row + 1, column=col + 1)
    height = len(lines)
    for row, line in enumerate(lines):
        for col in (0, width - 1):
            if line[col] != OBSTACLE_GLYPH:
                raise LoadError("boundary is not enclosed by walls", line=row + 1, column=col + 1)
    for row in (0, height - 1):
        for col, glyph in enumerate(lines[row]):
            if glyph != OBSTACLE_GLYPH:
                raise LoadError("boundary is not enclosed by walls", line=row + 1, column=col + 1)
    return GridWorld(width, height, obstacles)


def serialize_layout(world: GridWorld) -> str:
    rows = []
    for y in range(world.height):
        rows.append(
            "".join(
                OBSTACLE_GLYPH if Position(x, y) in world.obstacles else FLOOR_GLYPH
                for x in range(world.width)
            )
        )
    return "\n".join(rows) + "\n"
