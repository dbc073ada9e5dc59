"""Random initialization, mutation, crossover and elite selection for rule lists.

All operators take an explicit ``numpy.random.Generator`` and never modify
their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .envs import EnvSpec
from .errors import ArchiveError, ConfigError
from .policy import Op, Policy, Predicate, Rule, complexity

_OPS = (Op.LT, Op.GT)

PREDICATE, ACTION, ADD_RULE, REMOVE_RULE = range(4)


def threshold_grid(low: float, high: float, count: int = 41) -> tuple[float, ...]:
    """``count`` evenly spaced values over [low, high], rounded to 2 decimals.

    Values that collide after rounding are merged, so narrow ranges yield
    fewer than ``count`` thresholds."""
    values = np.round(np.linspace(low, high, count), 2) + 0.0
    return tuple(float(v) for v in np.unique(values))


def default_threshold_sets(spec: EnvSpec, count: int = 41) -> tuple[tuple[float, ...], ...]:
    return tuple(threshold_grid(lo, hi, count) for lo, hi in spec.obs_ranges)


@dataclass(frozen=True)
class VariationConfig:
    obs_dim: int
    action_count: int
    threshold_sets: tuple[tuple[float, ...], ...]
    max_rules: int = 6
    max_predicates_per_rule: int = 3
    p_mut: float = 0.3
    p_cross: float = 0.7
    mutation_kind_weights: tuple[float, float, float, float] = (0.5, 0.2, 0.15, 0.15)
    _kind_p: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.max_rules < 1 or self.max_predicates_per_rule < 1:
            raise ConfigError("max_rules and max_predicates_per_rule must be >= 1")
        if not (0.0 <= self.p_mut <= 1.0 and 0.0 <= self.p_cross <= 1.0):
            raise ConfigError("p_mut and p_cross must lie in [0, 1]")
        w = np.asarray(self.mutation_kind_weights, dtype=float)
        if w.shape != (4,) or (w < 0).any() or w.sum() <= 0:
            raise ConfigError("mutation_kind_weights must be 4 non-negative numbers with a positive sum")
        if len(self.threshold_sets) != self.obs_dim or any(len(ts) == 0 for ts in self.threshold_sets):
            raise ConfigError("need one non-empty threshold set per observation dimension")
        object.__setattr__(self, "threshold_sets", tuple(tuple(float(t) for t in ts) for ts in self.threshold_sets))
        object.__setattr__(self, "mutation_kind_weights", tuple(float(x) for x in w))
        object.__setattr__(self, "_kind_p", w / w.sum())

    @classmethod
    def for_env(cls, spec: EnvSpec, threshold_count: int = 41, **kwargs) -> "VariationConfig":
        return cls(spec.obs_dim, spec.action_count, default_threshold_sets(spec, threshold_count), **kwargs)

    @property
    def threshold_max(self) -> float:
        return max(abs(t) for ts in self.threshold_sets for t in ts)


def _choice(rng: np.random.Generator, seq: Sequence):
    return seq[int(rng.integers(len(seq)))]


def _choice_except(rng: np.random.Generator, seq: Sequence, current):
    others = [x for x in seq if x != current]
    return _choice(rng, others) if others else current


def random_predicate(cfg: VariationConfig, rng: np.random.Generator) -> Predicate:
    dim = int(rng.integers(cfg.obs_dim))
    op = _OPS[int(rng.integers(2))]
    return Predicate(dim, op, _choice(rng, cfg.threshold_sets[dim]))


def random_rule(cfg: VariationConfig, rng: np.random.Generator) -> Rule:
    m = int(rng.integers(1, cfg.max_predicates_per_rule + 1))
    preds = tuple(random_predicate(cfg, rng) for _ in range(m))
    return Rule(preds, int(rng.integers(cfg.action_count)))


def random_policy(cfg: VariationConfig, rng: np.random.Generator, fallback_action: int = 0) -> Policy:
    k = int(rng.integers(1, cfg.max_rules + 1))
    return Policy(tuple(random_rule(cfg, rng) for _ in range(k)), fallback_action)


def _mutate_predicate(policy: Policy, cfg: VariationConfig, rng: np.random.Generator) -> Policy:
    rules = list(policy.rules)
    i = int(rng.integers(len(rules)))
    preds = list(rules[i].predicates)
    j = int(rng.integers(len(preds)))
    p = preds[j]
    # only fields that can actually take a different value are candidates
    fields = ["op"]
    if cfg.obs_dim > 1:
        fields.append("dim")
    if any(t != p.threshold for t in cfg.threshold_sets[p.dim]):
        fields.append("threshold")
    which = _choice(rng, sorted(fields))
    if which == "dim":
        p = Predicate(_choice_except(rng, range(cfg.obs_dim), p.dim), p.op, p.threshold)
    elif which == "op":
        p = Predicate(p.dim, Op.GT if p.op is Op.LT else Op.LT, p.threshold)
    else:
        p = Predicate(p.dim, p.op, _choice_except(rng, cfg.threshold_sets[p.dim], p.threshold))
    preds[j] = p
    rules[i] = Rule(tuple(preds), rules[i].action)
    return Policy(tuple(rules), policy.fallback_action)


def _mutate_action(policy: Policy, cfg: VariationConfig, rng: np.random.Generator) -> Policy:
    rules = list(policy.rules)
    i = int(rng.integers(len(rules)))
    rules[i] = Rule(rules[i].predicates, _choice_except(rng, range(cfg.action_count), rules[i].action))
    return Policy(tuple(rules), policy.fallback_action)


def _add_rule(policy: Policy, cfg: VariationConfig, rng: np.random.Generator) -> Policy:
    rules = list(policy.rules)
    rules.insert(int(rng.integers(len(rules) + 1)), random_rule(cfg, rng))
    return Policy(tuple(rules), policy.fallback_action)


def _remove_rule(policy: Policy, cfg: VariationConfig, rng: np.random.Generator) -> Policy:
    rules = list(policy.rules)
    del rules[int(rng.integers(len(rules)))]
    return Policy(tuple(rules), policy.fallback_action)


def mutate(policy: Policy, cfg: VariationConfig, rng: np.random.Generator, kind: int | None = None) -> Policy:
    """Apply exactly one mutation; ``kind`` forces the mutation type.

    Rule addition at the rule cap, rule removal on a single-rule policy and
    action mutation with a single action all fall back to predicate mutation,
    so every call changes exactly one thing."""
    if kind is None:
        kind = int(rng.choice(4, p=cfg._kind_p))
    if kind == ADD_RULE and len(policy.rules) >= cfg.max_rules:
        kind = PREDICATE
    elif kind == REMOVE_RULE and len(policy.rules) <= 1:
        kind = PREDICATE
    elif kind == ACTION and cfg.action_count < 2:
        kind = PREDICATE
    if kind == PREDICATE:
        return _mutate_predicate(policy, cfg, rng)
    if kind == ACTION:
        return _mutate_action(policy, cfg, rng)
    if kind == ADD_RULE:
        return _add_rule(policy, cfg, rng)
    return _remove_rule(policy, cfg, rng)


def crossover(p1: Policy, p2: Policy, cfg: VariationConfig, rng: np.random.Generator,
              point: int | None = None) -> Policy:
    """Single-point crossover: the first ``c`` rules of ``p1`` then rules after
    position ``c`` of ``p2``.  ``c`` is uniform on [1, len(p1.rules)]."""
    c = int(rng.integers(1, len(p1.rules) + 1)) if point is None else point
    rules = p1.rules[:c] + p2.rules[c:]
    return Policy(rules[: cfg.max_rules], p1.fallback_action)


def elite_count(population: int, fraction: float = 0.25) -> int:
    return max(1, int(np.ceil(fraction * population)))


def select_elites(archive, k: int) -> list[Policy]:
    """Top-``k`` archive occupants by fitness, descending.

    Ties go to the lower complexity, then the earlier insertion."""
    cells = list(archive.cells.values())
    if not cells:
        raise ArchiveError("cannot select elites from an empty archive")
    cells.sort(key=lambda c: (-c.fitness, complexity(c.policy), c.seq))
    return [c.policy for c in cells[:k]]
