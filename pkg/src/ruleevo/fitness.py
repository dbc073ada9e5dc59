"""Episode rollouts and the complexity-penalized fitness."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernel
from .envs import EnvSpec, get_spec, initial_state
from .errors import StructuralError
from .policy import Policy, complexity
from .seeding import derive_seed


@dataclass(frozen=True)
class FitnessReport:
    performance: float
    complexity: int
    fitness: float
    episode_returns: tuple[float, ...]


def episode_seed(base_seed: int, episode: int) -> int:
    return derive_seed(base_seed, episode)


@lru_cache(maxsize=256)
def _start_states(env_name: str, episodes: int, base_seed: int) -> np.ndarray:
    spec = get_spec(env_name)
    states = np.array([initial_state(spec, episode_seed(base_seed, e)) for e in range(episodes)], dtype=np.float64)
    states.setflags(write=False)
    return states


def _check(policy: Policy, spec: EnvSpec) -> None:
    if policy.max_dim >= spec.obs_dim:
        raise StructuralError(f"policy reads s[{policy.max_dim}] but {spec.name} has {spec.obs_dim} observations")
    if policy.max_action >= spec.action_count:
        raise StructuralError(f"policy emits action {policy.max_action} but {spec.name} has {spec.action_count}")


def rollout_returns(policy: Policy, spec: EnvSpec, states0: np.ndarray) -> np.ndarray:
    """Undiscounted return of one episode from each start state."""
    _check(policy, spec)
    returns, _ = kernel.rollout_batch(spec.env_id, states0, *policy.flat(), spec.max_steps, spec.step_reward)
    return returns


def episode_return(policy: Policy, env_name: str, seed: int) -> float:
    """Return of one episode on a fresh environment seeded with ``seed``."""
    spec = get_spec(env_name)
    states0 = np.array([initial_state(spec, seed)], dtype=np.float64)
    return float(rollout_returns(policy, spec, states0)[0])


def penalized(performance: float, n_predicates: int, penalty: float) -> float:
    return performance - penalty * n_predicates


def evaluate(policy: Policy, env_name: str, episodes: int = 5, penalty: float = 0.1,
             base_seed: int = 0) -> FitnessReport:
    """Mean return over ``episodes`` seeded episodes minus ``penalty`` per predicate.

    Episode ``e`` uses seed ``episode_seed(base_seed, e)``, so every policy
    evaluated with the same ``base_seed`` faces the same start states."""
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    spec = get_spec(env_name)
    returns = rollout_returns(policy, spec, _start_states(spec.name, episodes, int(base_seed)))
    performance = float(np.mean(returns))
    c = complexity(policy)
    return FitnessReport(performance, c, penalized(performance, c, penalty), tuple(float(r) for r in returns))
