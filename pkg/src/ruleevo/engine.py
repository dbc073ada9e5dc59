"""Generational loop: evaluate, archive, select elites, breed."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .envs import get_spec
from .errors import ArchiveError, ConfigError
from .evolution import VariationConfig, crossover, elite_count, mutate, random_policy, select_elites
from .fitness import FitnessReport, evaluate
from .policy import Policy, complexity
from .qd import Archive, ArchiveCell, GridSpec
from .seeding import STREAM_BREED, STREAM_EVAL, derive_seed, make_rng

log = logging.getLogger(__name__)

ELITE_SOURCES = ("archive", "population")


@dataclass(frozen=True)
class RunConfig:
    env_name: str = "cartpole"
    population: int = 200
    generations: int = 500
    eval_episodes: int = 5
    complexity_penalty: float = 0.1
    elite_fraction: float = 0.25
    # None means the environment's solve threshold
    early_stop_threshold: float | None = None
    elite_source: str = "archive"
    cache_elite_fitness: bool = False
    max_rules: int = 6
    max_predicates_per_rule: int = 3
    p_mut: float = 0.3
    p_cross: float = 0.7
    mutation_kind_weights: tuple[float, float, float, float] = (0.5, 0.2, 0.15, 0.15)
    threshold_count: int = 41
    threshold_bins: int = 16
    # None means the largest |threshold| in the threshold sets
    threshold_max: float | None = None
    fallback_action: int = 0
    run_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        spec = get_spec(self.env_name)
        problems = []
        if self.population < 2:
            problems.append("population must be >= 2")
        if self.generations < 1:
            problems.append("generations must be >= 1")
        if self.eval_episodes < 1:
            problems.append("eval_episodes must be >= 1")
        if self.complexity_penalty < 0:
            problems.append("complexity_penalty must be >= 0")
        if not 0 < self.elite_fraction <= 1:
            problems.append("elite_fraction must lie in (0, 1]")
        if self.elite_source not in ELITE_SOURCES:
            problems.append(f"elite_source must be one of {ELITE_SOURCES}")
        if self.threshold_count < 1:
            problems.append("threshold_count must be >= 1")
        if not 0 <= self.fallback_action < spec.action_count:
            problems.append(f"fallback_action must be a valid {spec.name} action")
        if self.run_seed < 0:
            problems.append("run_seed must be non-negative")
        if self.workers < 1:
            problems.append("workers must be >= 1")
        if problems:
            raise ConfigError("; ".join(problems))
        object.__setattr__(self, "env_name", spec.name)
        object.__setattr__(self, "mutation_kind_weights", tuple(float(w) for w in self.mutation_kind_weights))
        # surfaces variation/grid errors before any evaluation
        try:
            self.grid_spec()
        except ArchiveError as exc:
            raise ConfigError(str(exc)) from None

    def variation(self) -> VariationConfig:
        return VariationConfig.for_env(
            get_spec(self.env_name), self.threshold_count, max_rules=self.max_rules,
            max_predicates_per_rule=self.max_predicates_per_rule, p_mut=self.p_mut, p_cross=self.p_cross,
            mutation_kind_weights=self.mutation_kind_weights)

    def grid_spec(self) -> GridSpec:
        vcfg = self.variation()
        th_max = self.threshold_max if self.threshold_max is not None else vcfg.threshold_max
        return GridSpec(self.max_rules, self.threshold_bins, th_max)

    @property
    def stop_threshold(self) -> float:
        if self.early_stop_threshold is not None:
            return self.early_stop_threshold
        return get_spec(self.env_name).solve_threshold

    @property
    def elites(self) -> int:
        return elite_count(self.population, self.elite_fraction)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mutation_kind_weights"] = list(self.mutation_kind_weights)
        return d


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float
    best_performance: float
    occupancy: int
    best_complexity: int
    wall_time: float

    FIELDS = ("generation", "best_fitness", "mean_fitness", "best_performance", "occupancy",
              "best_complexity", "wall_time")


@dataclass
class RunResult:
    archive: Archive
    stats: list[GenerationStats]
    best: ArchiveCell
    solved: bool
    evaluations: int
    episodes: int
    wall_time: float
    config: RunConfig = field(repr=False, default=None)

    @property
    def best_policy(self) -> Policy:
        return self.best.policy

    @property
    def generations_run(self) -> int:
        return len(self.stats)


def breed_population(elites: Sequence[Policy], cfg: VariationConfig, size: int,
                     rng: np.random.Generator) -> list[Policy]:
    """Elites first, then children of uniformly drawn elite pairs until ``size``."""
    if not elites:
        raise ValueError("need at least one elite to breed from")
    population = list(elites[:size])
    n = len(elites)
    while len(population) < size:
        p1 = elites[int(rng.integers(n))]
        p2 = elites[int(rng.integers(n))]
        if rng.random() < cfg.p_cross:
            child = crossover(p1, p2, cfg, rng)
        else:
            child = p1 if rng.random() < 0.5 else p2
        if rng.random() < cfg.p_mut:
            child = mutate(child, cfg, rng)
        population.append(child)
    return population


def _population_elites(population: Sequence[Policy], reports: Sequence[FitnessReport], k: int) -> list[Policy]:
    order = sorted(range(len(population)), key=lambda i: (-reports[i].fitness, reports[i].complexity, i))
    return [population[i] for i in order[:k]]


def run_evolution(cfg: RunConfig, on_generation: Callable[[GenerationStats], None] | None = None) -> RunResult:
    vcfg = cfg.variation()
    archive = Archive(cfg.grid_spec())
    rng = make_rng(cfg.run_seed, STREAM_BREED)
    population = [random_policy(vcfg, rng, cfg.fallback_action) for _ in range(cfg.population)]
    stats: list[GenerationStats] = []
    stop_at = cfg.stop_threshold
    evaluations = episodes = 0
    solved = False
    cache: dict[Policy, FitnessReport] = {}
    t_start = time.perf_counter()
    pool = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for g in range(1, cfg.generations + 1):
            t0 = time.perf_counter()
            base_seed = derive_seed(cfg.run_seed, STREAM_EVAL, g)

            def _eval(p: Policy) -> FitnessReport:
                return evaluate(p, cfg.env_name, cfg.eval_episodes, cfg.complexity_penalty, base_seed)

            todo = [p for p in population if p not in cache]
            fresh = list(pool.map(_eval, todo)) if pool is not None else [_eval(p) for p in todo]
            evaluations += len(fresh)
            episodes += len(fresh) * cfg.eval_episodes
            computed = dict(zip(todo, fresh))
            reports = [cache[p] if p in cache else computed[p] for p in population]

            for p, r in zip(population, reports):
                archive.insert(p, r.fitness, g, r.performance)

            best = archive.best()
            st = GenerationStats(
                generation=g,
                best_fitness=best.fitness,
                mean_fitness=float(np.mean([r.fitness for r in reports])),
                best_performance=max(r.performance for r in reports),
                occupancy=len(archive),
                best_complexity=complexity(best.policy),
                wall_time=time.perf_counter() - t0,
            )
            stats.append(st)
            log.info("gen %d best_fitness=%.3f best_perf=%.3f occupancy=%d", g, st.best_fitness,
                     st.best_performance, st.occupancy)
            if on_generation is not None:
                on_generation(st)

            if st.best_performance >= stop_at:
                solved = True
                break
            if g == cfg.generations:
                break

            if cfg.elite_source == "archive":
                elites = select_elites(archive, cfg.elites)
            else:
                elites = _population_elites(population, reports, cfg.elites)
            if cfg.cache_elite_fitness:
                by_policy = dict(zip(population, reports))
                cache = {p: by_policy[p] for p in elites if p in by_policy}
            population = breed_population(elites, vcfg, cfg.population, rng)
    finally:
        if pool is not None:
            pool.shutdown()

    return RunResult(archive, stats, archive.best(), solved, evaluations, episodes,
                     time.perf_counter() - t_start, cfg)
