"""Hybrid solver: a GA chooses ``(r_s, x_r2)``, a descent solver does the rest.

Each member of the population is a pair ``(r_s, x_r2)``.  With that pair held
fixed the remaining six parameters form a square 6x6 system, which the inner
descent method solves; the member's fitness is the squared error reached.
The run stops as soon as any inner solve converges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import circuit
from .circuit import MIN_PARAM, R_S, X_R2, CircuitParams
from .descent import FREE, DescentConfig, Method, SolveOutcome, sample_free, solve_fixed_pairs
from .evolution import breed, check_ga_sizes
from .formulation import TargetVector

SENTINEL_FITNESS = 6.0


@dataclass(frozen=True)
class HybridConfig:
    """Outer GA settings plus the inner descent configuration.

    ``seed_member`` injects a full parameter set as member 0 of the first
    generation: its ``(r_s, x_r2)`` become the pair and its other six values
    the inner starting point.  ``warm_start`` starts each child's inner solve
    from its first parent's solution instead of the inner initial-guess
    policy.
    """

    n_pop: int = 15
    n_pool: int = 10
    n_elite: int = 2
    crossover_fraction: float = 0.80
    max_generations: int = 10
    inner: Method = Method.DNR
    inner_cfg: DescentConfig = field(default_factory=DescentConfig)
    seed: int = 0
    init_ranges: tuple = ((0.0, 0.15), (0.0, 0.15))
    mutation_sigma: float = 0.01
    warm_start: bool = False
    seed_member: Optional[CircuitParams] = None

    def __post_init__(self):
        check_ga_sizes(self.n_pop, self.n_pool, self.n_elite, self.crossover_fraction)
        object.__setattr__(self, "inner", Method(self.inner))
        if self.max_generations < 0:
            raise ValueError("max_generations must be >= 0")
        if self.mutation_sigma < 0:
            raise ValueError("mutation_sigma must be non-negative")

    @property
    def max_inner_solves(self) -> int:
        return self.n_pop + self.max_generations * (self.n_pop - self.n_elite)


@dataclass
class HybridMember:
    r_s: float
    x_r2: float
    inner_outcome: SolveOutcome

    @property
    def fitness(self) -> float:
        err = self.inner_outcome.squared_error
        return err if np.isfinite(err) else SENTINEL_FITNESS


@dataclass
class HybridTrace:
    """Per-run instrumentation filled in by :func:`solve_hybrid`."""

    generations: list = field(default_factory=list)
    best_fitness: list = field(default_factory=list)
    inner_solves: int = 0
    members: list = field(default_factory=list)


def _guesses(cfg: HybridConfig, rng, count):
    inner = cfg.inner_cfg
    if inner.initial_guess is not None:
        return np.repeat(inner.initial_guess.as_array()[None, list(FREE)], count, axis=0)
    return sample_free(rng, count)


def _solve_members(targets, cfg, pairs, guesses):
    outcomes = solve_fixed_pairs(targets, pairs, guesses, cfg.inner_cfg, cfg.inner, stop_on_first=True)
    return [HybridMember(float(p[0]), float(p[1]), o) for p, o in zip(pairs, outcomes)]


def _first_converged(members):
    conv = [m for m in members if m.inner_outcome.converged]
    if not conv:
        return None
    return min(conv, key=lambda m: m.inner_outcome.squared_error)


def _result(member: HybridMember, generation: int, solves: int) -> SolveOutcome:
    o = member.inner_outcome
    return SolveOutcome(
        params=o.params,
        squared_error=o.squared_error,
        iterations=generation,
        converged=o.converged,
        failure_reason=o.failure_reason,
        evaluations=solves,
    )


def solve_hybrid(targets: TargetVector, cfg: Optional[HybridConfig] = None, trace: Optional[HybridTrace] = None) -> SolveOutcome:
    """Estimate all eight parameters with the GA-over-descent hybrid.

    ``iterations`` of the returned outcome counts outer generations bred
    after the initial one; ``evaluations`` counts inner descent solves.
    Members of a generation are solved together; if several converge in
    the same lockstep iteration the one with the lowest squared error wins.
    """
    cfg = cfg or HybridConfig()
    trace = trace if trace is not None else HybridTrace()
    seq = np.random.SeedSequence(cfg.seed)
    ga_rng, guess_rng = (np.random.default_rng(s) for s in seq.spawn(2))

    pairs = circuit.sample_uniform(ga_rng, cfg.init_ranges, cfg.n_pop)
    guesses = _guesses(cfg, guess_rng, cfg.n_pop)
    if cfg.seed_member is not None:
        seed_x = cfg.seed_member.as_array()
        pairs[0] = seed_x[[R_S, X_R2]]
        guesses[0] = seed_x[list(FREE)]

    members = _solve_members(targets, cfg, pairs, guesses)
    solves = len(members)
    generation = 0

    def record():
        trace.generations.append(generation)
        trace.best_fitness.append(members[0].fitness)
        trace.inner_solves = solves
        trace.members.extend(new)

    new = members
    members = sorted(members, key=lambda m: m.fitness)
    record()
    hit = _first_converged(new)
    while hit is None and generation < cfg.max_generations:
        generation += 1
        current = np.array([[m.r_s, m.x_r2] for m in members])
        children, parents = breed(
            ga_rng, cfg.n_pool, cfg.n_pop, cfg.n_elite, cfg.crossover_fraction,
            current, (cfg.mutation_sigma, cfg.mutation_sigma), MIN_PARAM,
        )
        if cfg.warm_start:
            guesses = np.array([members[j].inner_outcome.params.as_array()[list(FREE)] for j in parents])
        else:
            guesses = _guesses(cfg, guess_rng, len(children))
        new = _solve_members(targets, cfg, children, guesses)
        solves += len(new)
        members = sorted(members[: cfg.n_elite] + new, key=lambda m: m.fitness)
        record()
        hit = _first_converged(new)

    return _result(hit if hit is not None else members[0], generation, solves)
