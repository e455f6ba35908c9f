"""Population optimizers over bounded continuous boxes.

Provides grey-wolf and whale update steps, a random switcher that flips
a fair coin each iteration to run one of them on a shared population, a
generational GA baseline, and plain single-strategy drivers. All
randomness flows through one ``numpy.random.Generator`` per run, so a
seed fully determines the trajectory.

Leaders (alpha, beta, delta) are re-ranked every iteration as the three
best agents of the current population; the whale branch encircles alpha,
so both strategies share one best-solution notion, while the returned
optimum is the best position ever evaluated. NaN fitnesses are treated
as +inf and can never lead the pack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateObjectiveError


@dataclass(frozen=True)
class SearchBounds:
    """Feasible box: lower[d] < upper[d] for every dimension."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ConfigError("bounds must be equal-length 1-d vectors")
        if not np.all(lower < upper):
            raise ConfigError("every lower bound must be below its upper bound")

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @classmethod
    def cube(cls, low: float, high: float, dimension: int) -> "SearchBounds":
        return cls(np.full(dimension, float(low)), np.full(dimension, float(high)))


@dataclass(frozen=True)
class Agent:
    """A candidate solution and its (lower-is-better) fitness."""

    position: np.ndarray
    fitness: float


@dataclass(frozen=True)
class OptimizerParams:
    population_size: int = 30
    max_iterations: int = 200
    seed: int = 0
    spiral_b: float = 1.0
    ga_crossover_rate: float = 0.25
    ga_mutation_rate: float = 0.25

    def __post_init__(self):
        if self.population_size < 4:
            raise ConfigError("population_size must be at least 4")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be at least 1")
        for name in ("ga_crossover_rate", "ga_mutation_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")


@dataclass
class OptimizationTrace:
    """Best-so-far fitness per iteration plus bookkeeping counters."""

    best_fitness_per_iteration: list[float] = field(default_factory=list)
    best_position: np.ndarray | None = None
    evaluations: int = 0
    gwo_iterations: int = 0
    woa_iterations: int = 0


def clamp_to_bounds(position, bounds: SearchBounds) -> np.ndarray:
    """Elementwise clamp into [lower, upper]; accepts a vector or a matrix."""
    return np.clip(np.asarray(position, dtype=float), bounds.lower, bounds.upper)


def _sanitize(fitness: float) -> float:
    return math.inf if math.isnan(fitness) else float(fitness)


def _evaluate(objective, positions: np.ndarray) -> np.ndarray:
    return np.array([_sanitize(objective(p)) for p in positions])


def _rank_leaders(positions, fitness) -> tuple[Agent, Agent, Agent]:
    """The three best distinct agents of the current population, by fitness."""
    order = np.argsort(fitness, kind="stable")
    return tuple(
        Agent(position=positions[i].copy(), fitness=float(fitness[i]))
        for i in order[:3]
    )


def gwo_step(positions, leaders, a: float, rng, bounds: SearchBounds) -> np.ndarray:
    """Wolf-pack position update toward alpha, beta and delta.

    For each leader: A = 2 a r1 - a and C = 2 r2 with fresh random
    vectors per agent, D = |C * X_leader - X|, candidate = X_leader - A * D;
    the new position is the mean of the three candidates, clamped.
    """
    positions = np.asarray(positions, dtype=float)
    if len(positions) < 4:
        raise ConfigError("grey wolf update needs a population of at least 4")
    pop, dim = positions.shape
    total = np.zeros_like(positions)
    for leader in leaders:
        r1 = rng.random((pop, dim))
        r2 = rng.random((pop, dim))
        coeff_a = 2.0 * a * r1 - a
        coeff_c = 2.0 * r2
        dist = np.abs(coeff_c * leader.position - positions)
        total += leader.position - coeff_a * dist
    return clamp_to_bounds(total / 3.0, bounds)


def woa_step(
    positions, best: Agent, a: float, rng, bounds: SearchBounds, spiral_b: float = 1.0
) -> np.ndarray:
    """Whale update: encircle the best, spiral toward it, or chase a random peer.

    Per agent, p decides spiral (p >= 0.5) versus encircling; within
    encircling |A| >= 1 switches to exploration around a random *other*
    agent. A and C are scalar per agent so the single |A| test drives the
    whole move; l is uniform on [-1, 1].
    """
    positions = np.asarray(positions, dtype=float)
    pop, _ = positions.shape
    r1 = rng.random(pop)
    r2 = rng.random(pop)
    coeff_a = 2.0 * a * r1 - a
    coeff_c = 2.0 * r2
    p = rng.random(pop)
    spiral_l = rng.uniform(-1.0, 1.0, pop)
    rand_idx = rng.integers(0, pop - 1, size=pop)
    rand_idx = rand_idx + (rand_idx >= np.arange(pop))

    new_positions = np.empty_like(positions)

    spiral = p >= 0.5
    if spiral.any():
        dist = np.abs(best.position - positions[spiral])
        swirl = np.exp(spiral_b * spiral_l[spiral]) * np.cos(2.0 * np.pi * spiral_l[spiral])
        new_positions[spiral] = dist * swirl[:, None] + best.position

    encircle = ~spiral & (np.abs(coeff_a) < 1.0)
    if encircle.any():
        dist = np.abs(coeff_c[encircle, None] * best.position - positions[encircle])
        new_positions[encircle] = best.position - coeff_a[encircle, None] * dist

    explore = ~spiral & ~encircle
    if explore.any():
        peers = positions[rand_idx[explore]]
        dist = np.abs(coeff_c[explore, None] * peers - positions[explore])
        new_positions[explore] = peers - coeff_a[explore, None] * dist

    return clamp_to_bounds(new_positions, bounds)


def _drive(
    objective,
    bounds: SearchBounds,
    params: OptimizerParams,
    branch: str,
    init_population=None,
    callback=None,
):
    rng = np.random.default_rng(params.seed)
    pop, dim = params.population_size, bounds.dimension
    if init_population is not None:
        positions = clamp_to_bounds(np.asarray(init_population, dtype=float), bounds)
        if positions.shape != (pop, dim):
            raise ConfigError(f"init population must have shape {(pop, dim)}")
    else:
        positions = rng.uniform(bounds.lower, bounds.upper, size=(pop, dim))

    trace = OptimizationTrace()
    fitness = _evaluate(objective, positions)
    trace.evaluations += pop
    leaders = _rank_leaders(positions, fitness)
    best = leaders[0]

    for t in range(params.max_iterations):
        a = 2.0 * (1.0 - t / params.max_iterations)
        if branch == "rs":
            use_woa = rng.random() < 0.5
        else:
            use_woa = branch == "woa"
        if use_woa:
            positions = woa_step(positions, leaders[0], a, rng, bounds, params.spiral_b)
            trace.woa_iterations += 1
        else:
            positions = gwo_step(positions, leaders, a, rng, bounds)
            trace.gwo_iterations += 1
        fitness = _evaluate(objective, positions)
        trace.evaluations += pop
        leaders = _rank_leaders(positions, fitness)
        if leaders[0].fitness < best.fitness:
            best = leaders[0]
        trace.best_fitness_per_iteration.append(best.fitness)
        if callback is not None:
            callback(t, "woa" if use_woa else "gwo", positions, fitness, leaders)

    if math.isinf(best.fitness):
        raise DegenerateObjectiveError("every evaluation returned NaN or +inf")
    trace.best_position = best.position.copy()
    return best.position.copy(), best.fitness, trace


def rs_gwo_woa(objective, bounds, params, init_population=None, callback=None):
    """Random switcher: a fair coin per iteration picks the whale or wolf
    branch for the whole population; one shared a-schedule decays 2 -> 0."""
    return _drive(objective, bounds, params, "rs", init_population, callback)


def gwo_optimize(objective, bounds, params, init_population=None, callback=None):
    """Plain grey-wolf driver (the random switcher pinned to its wolf branch)."""
    return _drive(objective, bounds, params, "gwo", init_population, callback)


def woa_optimize(objective, bounds, params, init_population=None, callback=None):
    """Plain whale driver (the random switcher pinned to its whale branch)."""
    return _drive(objective, bounds, params, "woa", init_population, callback)


def uniform_crossover(parent1, parent2, rate: float, rng) -> tuple[np.ndarray, np.ndarray]:
    """Per-gene swap at the given rate; children are complementary."""
    swap = rng.random(len(parent1)) < rate
    child1 = np.where(swap, parent2, parent1)
    child2 = np.where(swap, parent1, parent2)
    return child1, child2


def uniform_mutation(genome, rate: float, bounds: SearchBounds, rng) -> np.ndarray:
    """Per-gene resample within bounds at the given rate."""
    mutate = rng.random(len(genome)) < rate
    fresh = rng.uniform(bounds.lower, bounds.upper)
    return np.where(mutate, fresh, genome)


def ga_optimize(objective, bounds, params, init_population=None, callback=None):
    """Generational GA baseline: size-2 tournaments, uniform crossover and
    mutation, elitism of one."""
    rng = np.random.default_rng(params.seed)
    pop, dim = params.population_size, bounds.dimension
    if init_population is not None:
        positions = clamp_to_bounds(np.asarray(init_population, dtype=float), bounds)
        if positions.shape != (pop, dim):
            raise ConfigError(f"init population must have shape {(pop, dim)}")
    else:
        positions = rng.uniform(bounds.lower, bounds.upper, size=(pop, dim))

    trace = OptimizationTrace()
    fitness = _evaluate(objective, positions)
    trace.evaluations += pop
    best = _rank_leaders(positions, fitness)[0]

    def tournament():
        i, j = rng.integers(0, pop, size=2)
        return positions[i] if fitness[i] <= fitness[j] else positions[j]

    for t in range(params.max_iterations):
        elite_idx = int(np.argmin(fitness))
        offspring = [positions[elite_idx].copy()]
        while len(offspring) < pop:
            child1, child2 = uniform_crossover(
                tournament(), tournament(), params.ga_crossover_rate, rng
            )
            offspring.append(uniform_mutation(child1, params.ga_mutation_rate, bounds, rng))
            if len(offspring) < pop:
                offspring.append(uniform_mutation(child2, params.ga_mutation_rate, bounds, rng))
        positions = clamp_to_bounds(np.array(offspring), bounds)
        fitness = _evaluate(objective, positions)
        trace.evaluations += pop
        champion = _rank_leaders(positions, fitness)[0]
        if champion.fitness < best.fitness:
            best = champion
        trace.best_fitness_per_iteration.append(best.fitness)
        if callback is not None:
            callback(t, "ga", positions, fitness, (best,))

    if math.isinf(best.fitness):
        raise DegenerateObjectiveError("every evaluation returned NaN or +inf")
    trace.best_position = best.position.copy()
    return best.position.copy(), best.fitness, trace


OPTIMIZERS = {
    "rs-gwo-woa": rs_gwo_woa,
    "gwo": gwo_optimize,
    "woa": woa_optimize,
    "ga": ga_optimize,
}
