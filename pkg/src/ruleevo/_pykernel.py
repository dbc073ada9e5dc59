"""Pure-Python rollout kernel, used when the compiled extension is unavailable.

Mirrors ``_ckernel.pyx`` function for function.
"""

from __future__ import annotations

import numpy as np

from .envs import ACROBOT, OBSERVERS, TERMINALS, TRANSITIONS

NAME = "python"


def _compile_rules(rule_start, dims, is_gt, thresholds, actions):
    rules = []
    for i in range(len(actions)):
        lo, hi = int(rule_start[i]), int(rule_start[i + 1])
        preds = [(int(dims[j]), bool(is_gt[j]), float(thresholds[j])) for j in range(lo, hi)]
        rules.append((preds, int(actions[i])))
    return rules


def _act(rules, fallback, obs):
    for preds, action in rules:
        for d, gt, th in preds:
            v = obs[d]
            if gt:
                if not v > th:
                    break
            elif not v < th:
                break
        else:
            return action
    return fallback


def rollout_batch(env_id, states0, rule_start, dims, is_gt, thresholds, actions, fallback,
                  max_steps, step_reward):
    """Run one episode per row of ``states0``; returns (returns, step_counts)."""
    rules = _compile_rules(rule_start, dims, is_gt, thresholds, actions)
    transition = TRANSITIONS[env_id]
    terminal = TERMINALS[env_id]
    observe = OBSERVERS[env_id]
    n = len(states0)
    returns = np.zeros(n, dtype=np.float64)
    steps = np.zeros(n, dtype=np.int64)
    for e in range(n):
        s = [float(v) for v in states0[e]]
        total = 0.0
        t = 0
        while True:
            obs = s if env_id != ACROBOT else observe(s)
            s = transition(s, _act(rules, fallback, obs))
            total += step_reward
            t += 1
            if terminal(s) or t >= max_steps:
                break
        returns[e] = total
        steps[e] = t
    return returns, steps


def simulate(env_id, state0, actions):
    """Raw physics under a fixed action script, ignoring termination.

    Returns (states[T, state_dim], terminated[T]) for the states reached after
    each action."""
    transition = TRANSITIONS[env_id]
    terminal = TERMINALS[env_id]
    s = [float(v) for v in state0]
    out = np.empty((len(actions), len(s)), dtype=np.float64)
    term = np.empty(len(actions), dtype=bool)
    for t, a in enumerate(actions):
        s = transition(s, int(a))
        out[t] = s
        term[t] = terminal(s)
    return out, term
