"""Real-coded genetic algorithm over the full eight-parameter space."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import circuit
from .circuit import INIT_RANGES, MIN_PARAM, CircuitParams
from .descent import SolveOutcome
from .formulation import TargetVector, squared_error_array

# Mutation noise per parameter, in PARAM_NAMES order.
MUTATION_SIGMAS = (0.01, 0.01, 0.33, 0.01, 0.01, 0.01, 0.01, 6.67)
GENERATION_PRESETS = (30, 50, 100)


@dataclass(frozen=True)
class GaConfig:
    n_pop: int = 20
    n_pool: int = 15
    n_elite: int = 2
    crossover_fraction: float = 0.80
    max_generations: int = 30
    seed: int = 0
    init_ranges: tuple = INIT_RANGES
    mutation_sigmas: tuple = MUTATION_SIGMAS
    convergence_threshold: float = 1e-5

    def __post_init__(self):
        check_ga_sizes(self.n_pop, self.n_pool, self.n_elite, self.crossover_fraction)
        for lo, hi in self.init_ranges:
            if lo > hi:
                raise ValueError(f"bad range ({lo}, {hi})")
        if len(self.init_ranges) != len(self.mutation_sigmas):
            raise ValueError("init_ranges and mutation_sigmas must have equal length")
        if self.max_generations < 0:
            raise ValueError("max_generations must be >= 0")


def check_ga_sizes(n_pop, n_pool, n_elite, crossover_fraction):
    if not (0 <= n_elite < n_pool <= n_pop):
        raise ValueError("need 0 <= n_elite < n_pool <= n_pop")
    if n_pool < 2:
        raise ValueError("mating pool needs at least two members")
    if not (0.0 <= crossover_fraction <= 1.0):
        raise ValueError("crossover_fraction must lie in [0, 1]")


@dataclass
class Population:
    """Genomes sorted by ascending fitness (once evaluated)."""

    genomes: np.ndarray
    fitness: np.ndarray
    generation: int = 0
    evaluations: int = field(default=0)

    @property
    def members(self) -> list:
        return [(CircuitParams.from_array(g), float(f)) for g, f in zip(self.genomes, self.fitness)]

    @property
    def best_fitness(self) -> float:
        return float(self.fitness[0])

    def __len__(self):
        return len(self.genomes)


def generation_rng(seed: int, generation: int) -> np.random.Generator:
    """Independent, reproducible stream for one generation of one run."""
    return np.random.default_rng([int(seed), int(generation)])


def crossover_count(n_pop: int, n_elite: int, crossover_fraction: float) -> int:
    return int(np.floor(crossover_fraction * (n_pop - n_elite) + 0.5))


def breed(rng, pool_size, n_pop, n_elite, crossover_fraction, genomes, sigmas, lower=MIN_PARAM):
    """Children for the next generation from a fitness-sorted ``genomes``.

    The first ``pool_size`` rows form the mating pool.  Returns
    ``(children, parents)`` where ``parents[i]`` is the pool index of child
    ``i``'s first parent.
    """
    n_children = n_pop - n_elite
    n_cross = crossover_count(n_pop, n_elite, crossover_fraction)
    n_mut = n_children - n_cross
    dim = genomes.shape[1]
    pool = genomes[:pool_size]

    p1 = rng.integers(pool_size, size=n_cross)
    p2 = (p1 + rng.integers(1, pool_size, size=n_cross)) % pool_size
    alpha = rng.uniform(0.0, 1.0, size=(n_cross, dim))
    crossed = pool[p1] + alpha * (pool[p2] - pool[p1])

    pm = rng.integers(pool_size, size=n_mut)
    noise = rng.standard_normal((n_mut, dim)) * np.asarray(sigmas, dtype=float)
    mutated = np.maximum(pool[pm] + noise, lower)

    return np.vstack([crossed, mutated]), np.concatenate([p1, pm])


def _sorted(genomes, fitness, generation, evaluations):
    order = np.argsort(fitness, kind="stable")
    return Population(genomes[order], fitness[order], generation, evaluations)


def fitness_of(genomes, targets: TargetVector) -> np.ndarray:
    """Squared residual norm for each row of ``genomes``."""
    return squared_error_array(genomes, targets)


def ga_init(cfg: GaConfig, targets: Optional[TargetVector] = None) -> Population:
    """Uniformly sampled initial population, evaluated when ``targets`` given."""
    genomes = circuit.sample_uniform(generation_rng(cfg.seed, 0), cfg.init_ranges, cfg.n_pop)
    if targets is None:
        return Population(genomes, np.full(cfg.n_pop, np.nan), 0, 0)
    return _sorted(genomes, fitness_of(genomes, targets), 0, cfg.n_pop)


def ga_step(pop: Population, targets: TargetVector, cfg: GaConfig) -> Population:
    """Advance one generation: discard, keep elites, crossover and mutate."""
    if np.isnan(pop.fitness).any():
        pop = _sorted(pop.genomes, fitness_of(pop.genomes, targets), pop.generation, pop.evaluations + len(pop))
    gen = pop.generation + 1
    rng = generation_rng(cfg.seed, gen)
    children, _ = breed(
        rng, cfg.n_pool, cfg.n_pop, cfg.n_elite, cfg.crossover_fraction, pop.genomes, cfg.mutation_sigmas
    )
    child_fit = fitness_of(children, targets)
    genomes = np.vstack([pop.genomes[: cfg.n_elite], children])
    fitness = np.concatenate([pop.fitness[: cfg.n_elite], child_fit])
    return _sorted(genomes, fitness, gen, pop.evaluations + len(children))


def solve_ga(targets: TargetVector, cfg: Optional[GaConfig] = None, history: Optional[list] = None) -> SolveOutcome:
    """Run the GA for ``cfg.max_generations`` generations after initialisation.

    Stops early once the best fitness drops below the convergence
    threshold.  If ``history`` is a list, the best fitness of every
    generation is appended to it.
    """
    cfg = cfg or GaConfig()
    pop = ga_init(cfg, targets)
    if history is not None:
        history.append(pop.best_fitness)
    while pop.generation < cfg.max_generations and pop.best_fitness >= cfg.convergence_threshold:
        pop = ga_step(pop, targets, cfg)
        if history is not None:
            history.append(pop.best_fitness)
    best = pop.best_fitness
    return SolveOutcome(
        params=CircuitParams.from_array(pop.genomes[0]),
        squared_error=best,
        iterations=pop.generation,
        converged=best < cfg.convergence_threshold,
        evaluations=pop.evaluations,
    )
