"""Genetic task allocation with learned distance heuristics.

An allocation of K tasks to N robots is encoded as one permutation of the
task indices 1..K and N-1 negative delimiter genes: the runs of task
indices between delimiters are the ordered task lists of robots 1..N.
Fitness is the reciprocal of a combined average-plus-bottleneck estimate
of travel distance, computed from pairwise distance heuristics that start
at the 1-norm and are pulled toward realized distances as robots report
completed legs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import ConfigurationError, DomainError, ValidationError
from .gridworld import Position

Chromosome = list[int]

# Fitness when every robot already sits on all of its tasks; keeps ordering
# sensible without dividing by zero.
ZERO_DISTANCE_FITNESS = 1e12


@dataclass
class GAConfig:
    population_size: int = 100
    max_generations: int = 200
    mutation_probability: float = 0.2
    parent_fraction: float = 0.5
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ConfigurationError("population size must be at least 2")
        if self.max_generations < 1:
            raise ConfigurationError("need at least one generation")
        if not 0.0 <= self.mutation_probability <= 1.0:
            raise ConfigurationError("mutation probability must lie in [0, 1]")
        if not 0.0 < self.parent_fraction <= 1.0:
            raise ConfigurationError("parent fraction must lie in (0, 1]")


class HeuristicStore:
    """Learned symmetric pairwise distance estimates.

    Unqueried pairs fall back to the 1-norm distance; a pair's estimate
    moves toward a realized distance by a fraction eta whenever a completed
    leg for that pair is reported. Only pairs that actually occur are kept.
    """

    def __init__(self, eta: float = 0.5):
        if not 0.0 < eta <= 1.0:
            raise ConfigurationError("learning rate must lie in (0, 1]")
        self.eta = eta
        self._estimates: dict[frozenset[Position], float] = {}

    def estimate(self, a: Position, b: Position) -> float:
        if a == b:
            return 0.0
        learned = self._estimates.get(frozenset((a, b)))
        if learned is not None:
            return learned
        return float(abs(a[0] - b[0]) + abs(a[1] - b[1]))

    def learn(self, a: Position, b: Position, realized: float, received: bool = True) -> None:
        """Gradient step toward a realized distance; no-op unless an update was received."""
        if realized < 0:
            raise DomainError("realized distance cannot be negative")
        if not received or a == b:
            return
        key = frozenset((a, b))
        current = self.estimate(a, b)
        self._estimates[key] = current + self.eta * (realized - current)

    def known_pairs(self) -> int:
        return len(self._estimates)


def learn(
    store: HeuristicStore, a: Position, b: Position, realized: float, received: bool = True
) -> HeuristicStore:
    """Module-level alias for HeuristicStore.learn; returns the store."""
    store.learn(a, b, realized, received)
    return store


def gene_pool(n_robots: int, n_tasks: int) -> list[int]:
    """The full gene multiset: task indices 1..K plus delimiters -1..-(N-1)."""
    return list(range(1, n_tasks + 1)) + [-d for d in range(1, n_robots)]


def validate_chromosome(genes: Chromosome, n_robots: int, n_tasks: int) -> None:
    expected_len = n_robots + n_tasks - 1
    if len(genes) != expected_len:
        raise ValidationError(f"chromosome length {len(genes)}, expected {expected_len}")
    positives = sorted(g for g in genes if g > 0)
    if positives != list(range(1, n_tasks + 1)):
        raise ValidationError(f"task genes are not a permutation of 1..{n_tasks}")
    delimiters = [g for g in genes if g < 0]
    if len(delimiters) != n_robots - 1 or len(set(delimiters)) != len(delimiters):
        raise ValidationError(f"expected {n_robots - 1} distinct delimiter genes")
    if any(g == 0 for g in genes):
        raise ValidationError("zero is not a valid gene")


def decode(genes: Chromosome, n_robots: int) -> list[list[int]]:
    """Split a chromosome into the ordered task-index list of each robot."""
    n_tasks = sum(1 for g in genes if g > 0)
    validate_chromosome(genes, n_robots, n_tasks)
    lists: list[list[int]] = [[]]
    for gene in genes:
        if gene < 0:
            lists.append([])
        else:
            lists[-1].append(gene)
    return lists


def encode(task_lists: list[list[int]]) -> Chromosome:
    """Inverse of decode, with delimiter labels normalized to -1, -2, ..."""
    genes: Chromosome = []
    for index, tasks in enumerate(task_lists):
        if index > 0:
            genes.append(-index)
        genes.extend(tasks)
    validate_chromosome(genes, len(task_lists), sum(len(t) for t in task_lists))
    return genes


def random_chromosome(n_robots: int, n_tasks: int, rng: random.Random) -> Chromosome:
    genes = gene_pool(n_robots, n_tasks)
    rng.shuffle(genes)
    return genes


def fitness(
    genes: Chromosome,
    starts: list[Position],
    task_positions: dict[int, Position],
    store: HeuristicStore,
) -> float:
    """Reciprocal of the estimated average-per-task plus bottleneck-per-task distance."""
    n_robots = len(starts)
    n_tasks = len(task_positions)
    allocation = decode(genes, n_robots)
    estimates = []
    for start, tasks in zip(starts, allocation):
        if not tasks:
            estimates.append(0.0)
            continue
        total = store.estimate(start, task_positions[tasks[0]])
        for a, b in zip(tasks, tasks[1:]):
            total += store.estimate(task_positions[a], task_positions[b])
        estimates.append(total)
    combined = sum(estimates) / (n_tasks * n_robots) + max(estimates) / n_tasks
    if combined == 0.0:
        return ZERO_DISTANCE_FITNESS
    return 1.0 / combined


def crossover(parent1: Chromosome, parent2: Chromosome, i: int, j: int) -> Chromosome:
    """Order crossover: keep parent1's genes at 1-based positions i..j, fill the rest
    with parent2's unused genes scanned start to end."""
    length = len(parent1)
    if not 1 <= i <= j <= length:
        raise DomainError(f"cut points ({i}, {j}) invalid for length {length}")
    used = set(parent1[i - 1 : j])
    filler = (g for g in parent2 if g not in used)
    child: Chromosome = []
    for k in range(length):
        if i - 1 <= k < j:
            child.append(parent1[k])
        else:
            child.append(next(filler))
    return child


def mutate(genes: Chromosome, m: int, n: int, rng: random.Random) -> Chromosome:
    """Scramble mutation: randomly permute the 1-based gene range m..n."""
    if not 1 <= m <= n <= len(genes):
        raise DomainError(f"scramble range ({m}, {n}) invalid for length {len(genes)}")
    child = list(genes)
    segment = child[m - 1 : n]
    rng.shuffle(segment)
    child[m - 1 : n] = segment
    return child


def _pick_parent_indices(rng: random.Random, pool_size: int) -> tuple[int, int]:
    # Rank-weighted draw: the best of the pool gets weight pool_size, the
    # worst weight 1. The two parents are forced distinct.
    weights = [pool_size - r for r in range(pool_size)]
    first = rng.choices(range(pool_size), weights=weights, k=1)[0]
    second = first
    while second == first:
        second = rng.choices(range(pool_size), weights=weights, k=1)[0]
    return first, second


def evolve(
    cfg: GAConfig,
    starts: list[Position],
    task_positions: dict[int, Position],
    store: HeuristicStore,
) -> tuple[Chromosome, list[float]]:
    """Run the generational loop; returns the best chromosome ever seen and
    the best fitness per generation (non-decreasing under elitist survival)."""
    n_robots = len(starts)
    n_tasks = len(task_positions)
    if n_robots < 1 or n_tasks < 1:
        raise ConfigurationError("need at least one robot and one task")
    rng = random.Random(cfg.rng_seed)

    def evaluated(genes: Chromosome) -> tuple[float, Chromosome]:
        return fitness(genes, starts, task_positions, store), genes

    population = [evaluated(random_chromosome(n_robots, n_tasks, rng)) for _ in range(cfg.population_size)]
    population.sort(key=lambda pair: -pair[0])
    history = [population[0][0]]

    length = n_robots + n_tasks - 1
    pool_size = max(2, min(cfg.population_size, round(cfg.population_size * cfg.parent_fraction)))

    for _ in range(cfg.max_generations):
        children: list[tuple[float, Chromosome]] = []
        while len(children) < cfg.population_size:
            a, b = _pick_parent_indices(rng, pool_size)
            p1, p2 = population[a][1], population[b][1]
            i = rng.randint(1, length)
            j = rng.randint(i, length)
            for child in (crossover(p1, p2, i, j), crossover(p2, p1, i, j)):
                if rng.random() < cfg.mutation_probability:
                    m = rng.randint(1, length)
                    n = rng.randint(m, length)
                    child = mutate(child, m, n, rng)
                children.append(evaluated(child))
        # Elitist truncation over survivors plus offspring.
        population = sorted(population + children, key=lambda pair: -pair[0])[: cfg.population_size]
        history.append(population[0][0])

    return population[0][1], history
