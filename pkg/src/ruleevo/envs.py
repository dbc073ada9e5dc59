"""CartPole, MountainCar and Acrobot with the standard classic-control dynamics.

The transition functions here are plain Python on floats.  The compiled
rollout kernel re-implements them with the same operation order so both
backends produce bit-identical trajectories.

Rewards: +1 per step on CartPole, -1 per step on MountainCar and Acrobot
(including the terminating step).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, EnvUsageError
from .seeding import make_rng

CARTPOLE, MOUNTAINCAR, ACROBOT = 0, 1, 2


@dataclass(frozen=True)
class EnvSpec:
    name: str
    env_id: int
    obs_dim: int
    action_count: int
    max_steps: int
    solve_threshold: float
    state_dim: int
    # per-dimension (low, high) used to build threshold grids
    obs_ranges: tuple[tuple[float, float], ...]
    step_reward: float


_PI = math.pi

SPECS: dict[str, EnvSpec] = {
    "cartpole": EnvSpec("cartpole", CARTPOLE, 4, 2, 500, 500.0, 4,
                        ((-2.4, 2.4), (-3.0, 3.0), (-0.21, 0.21), (-3.0, 3.0)), 1.0),
    "mountaincar": EnvSpec("mountaincar", MOUNTAINCAR, 2, 3, 200, -110.0, 2,
                           ((-1.2, 0.6), (-0.07, 0.07)), -1.0),
    "acrobot": EnvSpec("acrobot", ACROBOT, 6, 3, 500, -100.0, 4,
                       ((-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0),
                        (-4 * _PI, 4 * _PI), (-9 * _PI, 9 * _PI)), -1.0),
}


def get_spec(name: str) -> EnvSpec:
    try:
        return SPECS[name.lower()]
    except KeyError:
        raise ConfigError(f"unknown environment {name!r}; expected one of {sorted(SPECS)}") from None


# --- CartPole --------------------------------------------------------------

CP_GRAVITY = 9.8
CP_MASSCART = 1.0
CP_MASSPOLE = 0.1
CP_TOTAL_MASS = CP_MASSPOLE + CP_MASSCART
CP_LENGTH = 0.5
CP_POLEMASS_LENGTH = CP_MASSPOLE * CP_LENGTH
CP_FORCE_MAG = 10.0
CP_TAU = 0.02
CP_THETA_LIMIT = 12 * 2 * math.pi / 360
CP_X_LIMIT = 2.4


def cartpole_transition(s, action):
    x, x_dot, theta, theta_dot = s
    force = CP_FORCE_MAG if action == 1 else -CP_FORCE_MAG
    costheta = math.cos(theta)
    sintheta = math.sin(theta)
    temp = (force + CP_POLEMASS_LENGTH * (theta_dot * theta_dot) * sintheta) / CP_TOTAL_MASS
    thetaacc = (CP_GRAVITY * sintheta - costheta * temp) / (
        CP_LENGTH * (4.0 / 3.0 - CP_MASSPOLE * (costheta * costheta) / CP_TOTAL_MASS))
    xacc = temp - CP_POLEMASS_LENGTH * thetaacc * costheta / CP_TOTAL_MASS
    x = x + CP_TAU * x_dot
    x_dot = x_dot + CP_TAU * xacc
    theta = theta + CP_TAU * theta_dot
    theta_dot = theta_dot + CP_TAU * thetaacc
    return [x, x_dot, theta, theta_dot]


def cartpole_terminal(s) -> bool:
    return s[0] < -CP_X_LIMIT or s[0] > CP_X_LIMIT or s[2] < -CP_THETA_LIMIT or s[2] > CP_THETA_LIMIT


# --- MountainCar -----------------------------------------------------------

MC_MIN_POS = -1.2
MC_MAX_POS = 0.6
MC_MAX_SPEED = 0.07
MC_GOAL_POS = 0.5
MC_FORCE = 0.001
MC_GRAVITY = 0.0025


def mountaincar_transition(s, action):
    position, velocity = s
    velocity += (action - 1) * MC_FORCE + math.cos(3 * position) * (-MC_GRAVITY)
    velocity = min(max(velocity, -MC_MAX_SPEED), MC_MAX_SPEED)
    position += velocity
    position = min(max(position, MC_MIN_POS), MC_MAX_POS)
    if position == MC_MIN_POS and velocity < 0:
        velocity = 0.0
    return [position, velocity]


def mountaincar_terminal(s) -> bool:
    return s[0] >= MC_GOAL_POS and s[1] >= 0.0


# --- Acrobot ---------------------------------------------------------------

AB_DT = 0.2
AB_L1 = 1.0
AB_M1 = 1.0
AB_M2 = 1.0
AB_LC1 = 0.5
AB_LC2 = 0.5
AB_I1 = 1.0
AB_I2 = 1.0
AB_G = 9.8
AB_MAX_VEL_1 = 4 * math.pi
AB_MAX_VEL_2 = 9 * math.pi
AB_TORQUES = (-1.0, 0.0, 1.0)


def _acrobot_derivs(t1, t2, dt1, dt2, a):
    d1 = (AB_M1 * AB_LC1 * AB_LC1 + AB_M2 * (AB_L1 * AB_L1 + AB_LC2 * AB_LC2 + 2 * AB_L1 * AB_LC2 * math.cos(t2))
          + AB_I1 + AB_I2)
    d2 = AB_M2 * (AB_LC2 * AB_LC2 + AB_L1 * AB_LC2 * math.cos(t2)) + AB_I2
    phi2 = AB_M2 * AB_LC2 * AB_G * math.cos(t1 + t2 - math.pi / 2.0)
    phi1 = (-AB_M2 * AB_L1 * AB_LC2 * (dt2 * dt2) * math.sin(t2)
            - 2 * AB_M2 * AB_L1 * AB_LC2 * dt2 * dt1 * math.sin(t2)
            + (AB_M1 * AB_LC1 + AB_M2 * AB_L1) * AB_G * math.cos(t1 - math.pi / 2.0)
            + phi2)
    ddt2 = ((a + d2 / d1 * phi1 - AB_M2 * AB_L1 * AB_LC2 * (dt1 * dt1) * math.sin(t2) - phi2)
            / (AB_M2 * AB_LC2 * AB_LC2 + AB_I2 - d2 * d2 / d1))
    ddt1 = -(d2 * ddt2 + phi1) / d1
    return dt1, dt2, ddt1, ddt2


def _wrap(x, lo, hi):
    diff = hi - lo
    while x > hi:
        x = x - diff
    while x < lo:
        x = x + diff
    return x


def acrobot_transition(s, action):
    a = AB_TORQUES[action]
    y0, y1, y2, y3 = s
    h = AB_DT / 2.0
    k1 = _acrobot_derivs(y0, y1, y2, y3, a)
    k2 = _acrobot_derivs(y0 + h * k1[0], y1 + h * k1[1], y2 + h * k1[2], y3 + h * k1[3], a)
    k3 = _acrobot_derivs(y0 + h * k2[0], y1 + h * k2[1], y2 + h * k2[2], y3 + h * k2[3], a)
    k4 = _acrobot_derivs(y0 + AB_DT * k3[0], y1 + AB_DT * k3[1], y2 + AB_DT * k3[2], y3 + AB_DT * k3[3], a)
    c = AB_DT / 6.0
    n0 = y0 + c * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    n1 = y1 + c * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    n2 = y2 + c * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    n3 = y3 + c * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
    n0 = _wrap(n0, -math.pi, math.pi)
    n1 = _wrap(n1, -math.pi, math.pi)
    n2 = min(max(n2, -AB_MAX_VEL_1), AB_MAX_VEL_1)
    n3 = min(max(n3, -AB_MAX_VEL_2), AB_MAX_VEL_2)
    return [n0, n1, n2, n3]


def acrobot_terminal(s) -> bool:
    return -math.cos(s[0]) - math.cos(s[1] + s[0]) > 1.0


def acrobot_observe(s):
    return [math.cos(s[0]), math.sin(s[0]), math.cos(s[1]), math.sin(s[1]), s[2], s[3]]


def _identity(s):
    return list(s)


TRANSITIONS = {CARTPOLE: cartpole_transition, MOUNTAINCAR: mountaincar_transition, ACROBOT: acrobot_transition}
TERMINALS = {CARTPOLE: cartpole_terminal, MOUNTAINCAR: mountaincar_terminal, ACROBOT: acrobot_terminal}
OBSERVERS = {CARTPOLE: _identity, MOUNTAINCAR: _identity, ACROBOT: acrobot_observe}


def initial_state(spec: EnvSpec, seed: int, reset_index: int = 0) -> list[float]:
    """Internal start state for the ``reset_index``-th reset of an env seeded with ``seed``.

    The first reset draws exactly what Gymnasium's ``reset(seed=seed)`` draws."""
    rng = make_rng(seed) if reset_index == 0 else make_rng(seed, reset_index)
    if spec.env_id == CARTPOLE:
        return [float(v) for v in rng.uniform(-0.05, 0.05, size=4)]
    if spec.env_id == MOUNTAINCAR:
        return [float(rng.uniform(-0.6, -0.4)), 0.0]
    return [float(v) for v in rng.uniform(-0.1, 0.1, size=4)]


@dataclass(frozen=True)
class StepResult:
    state: list[float]
    reward: float
    done: bool
    terminated: bool = False
    truncated: bool = False


class Environment:
    """Single-episode-at-a-time environment.  Trajectories are a pure function of
    (name, seed, action sequence)."""

    def __init__(self, spec: EnvSpec, seed: int):
        if seed < 0:
            raise ConfigError(f"seed must be non-negative, got {seed}")
        self.spec = spec
        self.seed = int(seed)
        self._resets = 0
        self._state: list[float] | None = None
        self._steps = 0
        self._done = True
        self._transition = TRANSITIONS[spec.env_id]
        self._terminal = TERMINALS[spec.env_id]
        self._observe = OBSERVERS[spec.env_id]

    @property
    def internal_state(self) -> list[float]:
        if self._state is None:
            raise EnvUsageError("environment has not been reset")
        return list(self._state)

    def set_internal_state(self, state) -> list[float]:
        """Start an episode from an explicit internal state; returns the observation."""
        if len(state) != self.spec.state_dim:
            raise EnvUsageError(f"{self.spec.name} internal state has {self.spec.state_dim} components")
        self._state = [float(v) for v in state]
        self._steps = 0
        self._done = False
        return self._observe(self._state)

    def reset(self) -> list[float]:
        state = initial_state(self.spec, self.seed, self._resets)
        self._resets += 1
        return self.set_internal_state(state)

    def step(self, action: int) -> StepResult:
        if self._state is None or self._done:
            raise EnvUsageError("step() called on a finished or un-reset environment; call reset()")
        if not 0 <= action < self.spec.action_count:
            raise EnvUsageError(f"invalid action {action} for {self.spec.name}")
        self._state = self._transition(self._state, int(action))
        self._steps += 1
        terminated = self._terminal(self._state)
        truncated = not terminated and self._steps >= self.spec.max_steps
        self._done = terminated or truncated
        return StepResult(self._observe(self._state), self.spec.step_reward, self._done, terminated, truncated)


def make_env(name: str, seed: int) -> Environment:
    return Environment(get_spec(name), seed)
