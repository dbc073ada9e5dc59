# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled rollout kernel.

Same contract and operation order as ``_pykernel``; results are bit-identical.
"""

import numpy as np
from libc.math cimport cos, sin, pi

NAME = "cython"

cdef enum:
    CARTPOLE = 0
    MOUNTAINCAR = 1
    ACROBOT = 2

# CartPole
cdef double CP_GRAVITY = 9.8
cdef double CP_MASSCART = 1.0
cdef double CP_MASSPOLE = 0.1
cdef double CP_TOTAL_MASS = CP_MASSPOLE + CP_MASSCART
cdef double CP_LENGTH = 0.5
cdef double CP_POLEMASS_LENGTH = CP_MASSPOLE * CP_LENGTH
cdef double CP_FORCE_MAG = 10.0
cdef double CP_TAU = 0.02
cdef double CP_THETA_LIMIT = 12 * 2 * pi / 360
cdef double CP_X_LIMIT = 2.4

# MountainCar
cdef double MC_MIN_POS = -1.2
cdef double MC_MAX_POS = 0.6
cdef double MC_MAX_SPEED = 0.07
cdef double MC_GOAL_POS = 0.5
cdef double MC_FORCE = 0.001
cdef double MC_GRAVITY = 0.0025

# Acrobot
cdef double AB_DT = 0.2
cdef double AB_L1 = 1.0
cdef double AB_M1 = 1.0
cdef double AB_M2 = 1.0
cdef double AB_LC1 = 0.5
cdef double AB_LC2 = 0.5
cdef double AB_I1 = 1.0
cdef double AB_I2 = 1.0
cdef double AB_G = 9.8
cdef double AB_MAX_VEL_1 = 4 * pi
cdef double AB_MAX_VEL_2 = 9 * pi


cdef inline double _clip(double x, double lo, double hi) noexcept nogil:
    # same semantics as min(max(x, lo), hi)
    if x < lo:
        x = lo
    if hi < x:
        x = hi
    return x


cdef void cartpole_step(double* s, int action) noexcept nogil:
    cdef double x = s[0], x_dot = s[1], theta = s[2], theta_dot = s[3]
    cdef double force = CP_FORCE_MAG if action == 1 else -CP_FORCE_MAG
    cdef double costheta = cos(theta)
    cdef double sintheta = sin(theta)
    cdef double temp = (force + CP_POLEMASS_LENGTH * (theta_dot * theta_dot) * sintheta) / CP_TOTAL_MASS
    cdef double thetaacc = (CP_GRAVITY * sintheta - costheta * temp) / (
        CP_LENGTH * (4.0 / 3.0 - CP_MASSPOLE * (costheta * costheta) / CP_TOTAL_MASS))
    cdef double xacc = temp - CP_POLEMASS_LENGTH * thetaacc * costheta / CP_TOTAL_MASS
    s[0] = x + CP_TAU * x_dot
    s[1] = x_dot + CP_TAU * xacc
    s[2] = theta + CP_TAU * theta_dot
    s[3] = theta_dot + CP_TAU * thetaacc


cdef bint cartpole_terminal(double* s) noexcept nogil:
    return s[0] < -CP_X_LIMIT or s[0] > CP_X_LIMIT or s[2] < -CP_THETA_LIMIT or s[2] > CP_THETA_LIMIT


cdef void mountaincar_step(double* s, int action) noexcept nogil:
    cdef double position = s[0], velocity = s[1]
    velocity = velocity + ((<double>(action - 1)) * MC_FORCE + cos(3 * position) * (-MC_GRAVITY))
    velocity = _clip(velocity, -MC_MAX_SPEED, MC_MAX_SPEED)
    position = position + velocity
    position = _clip(position, MC_MIN_POS, MC_MAX_POS)
    if position == MC_MIN_POS and velocity < 0:
        velocity = 0.0
    s[0] = position
    s[1] = velocity


cdef bint mountaincar_terminal(double* s) noexcept nogil:
    return s[0] >= MC_GOAL_POS and s[1] >= 0.0


cdef void acrobot_derivs(double t1, double t2, double dt1, double dt2, double a, double* out) noexcept nogil:
    cdef double d1 = (AB_M1 * AB_LC1 * AB_LC1 + AB_M2 * (AB_L1 * AB_L1 + AB_LC2 * AB_LC2 + 2 * AB_L1 * AB_LC2 * cos(t2))
                      + AB_I1 + AB_I2)
    cdef double d2 = AB_M2 * (AB_LC2 * AB_LC2 + AB_L1 * AB_LC2 * cos(t2)) + AB_I2
    cdef double phi2 = AB_M2 * AB_LC2 * AB_G * cos(t1 + t2 - pi / 2.0)
    cdef double phi1 = (-AB_M2 * AB_L1 * AB_LC2 * (dt2 * dt2) * sin(t2)
                        - 2 * AB_M2 * AB_L1 * AB_LC2 * dt2 * dt1 * sin(t2)
                        + (AB_M1 * AB_LC1 + AB_M2 * AB_L1) * AB_G * cos(t1 - pi / 2.0)
                        + phi2)
    cdef double ddt2 = ((a + d2 / d1 * phi1 - AB_M2 * AB_L1 * AB_LC2 * (dt1 * dt1) * sin(t2) - phi2)
                        / (AB_M2 * AB_LC2 * AB_LC2 + AB_I2 - d2 * d2 / d1))
    cdef double ddt1 = -(d2 * ddt2 + phi1) / d1
    out[0] = dt1
    out[1] = dt2
    out[2] = ddt1
    out[3] = ddt2


cdef inline double _wrap(double x, double lo, double hi) noexcept nogil:
    cdef double diff = hi - lo
    while x > hi:
        x = x - diff
    while x < lo:
        x = x + diff
    return x


cdef void acrobot_step(double* s, int action) noexcept nogil:
    cdef double a = <double>(action - 1)
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double h = AB_DT / 2.0
    cdef double c = AB_DT / 6.0
    cdef int i
    acrobot_derivs(s[0], s[1], s[2], s[3], a, k1)
    acrobot_derivs(s[0] + h * k1[0], s[1] + h * k1[1], s[2] + h * k1[2], s[3] + h * k1[3], a, k2)
    acrobot_derivs(s[0] + h * k2[0], s[1] + h * k2[1], s[2] + h * k2[2], s[3] + h * k2[3], a, k3)
    acrobot_derivs(s[0] + AB_DT * k3[0], s[1] + AB_DT * k3[1], s[2] + AB_DT * k3[2], s[3] + AB_DT * k3[3], a, k4)
    for i in range(4):
        s[i] = s[i] + c * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i])
    s[0] = _wrap(s[0], -pi, pi)
    s[1] = _wrap(s[1], -pi, pi)
    s[2] = _clip(s[2], -AB_MAX_VEL_1, AB_MAX_VEL_1)
    s[3] = _clip(s[3], -AB_MAX_VEL_2, AB_MAX_VEL_2)


cdef bint acrobot_terminal(double* s) noexcept nogil:
    return -cos(s[0]) - cos(s[1] + s[0]) > 1.0


cdef inline void env_step(int env_id, double* s, int action) noexcept nogil:
    if env_id == CARTPOLE:
        cartpole_step(s, action)
    elif env_id == MOUNTAINCAR:
        mountaincar_step(s, action)
    else:
        acrobot_step(s, action)


cdef inline bint env_terminal(int env_id, double* s) noexcept nogil:
    if env_id == CARTPOLE:
        return cartpole_terminal(s)
    elif env_id == MOUNTAINCAR:
        return mountaincar_terminal(s)
    return acrobot_terminal(s)


cdef inline int act(const int[::1] rule_start, const int[::1] dims, const signed char[::1] is_gt,
                    const double[::1] thresholds, const int[::1] actions, int fallback,
                    double* obs) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double v
    cdef bint ok
    for i in range(actions.shape[0]):
        ok = True
        for j in range(rule_start[i], rule_start[i + 1]):
            v = obs[dims[j]]
            if is_gt[j]:
                if not v > thresholds[j]:
                    ok = False
                    break
            elif not v < thresholds[j]:
                ok = False
                break
        if ok:
            return actions[i]
    return fallback


def rollout_batch(int env_id, const double[:, ::1] states0, const int[::1] rule_start, const int[::1] dims,
                  const signed char[::1] is_gt, const double[::1] thresholds, const int[::1] actions,
                  int fallback, int max_steps, double step_reward):
    """Run one episode per row of ``states0``; returns (returns, step_counts)."""
    cdef Py_ssize_t n = states0.shape[0], e, k
    cdef Py_ssize_t sdim = states0.shape[1]
    returns_arr = np.zeros(n, dtype=np.float64)
    steps_arr = np.zeros(n, dtype=np.int64)
    cdef double[::1] returns = returns_arr
    cdef long long[::1] steps = steps_arr
    cdef double s[4]
    cdef double obs[6]
    cdef double* o
    cdef double total
    cdef long long t
    cdef int a
    if sdim > 4:
        raise ValueError("state dimension exceeds kernel capacity")
    with nogil:
        for e in range(n):
            for k in range(sdim):
                s[k] = states0[e, k]
            total = 0.0
            t = 0
            while True:
                if env_id == ACROBOT:
                    obs[0] = cos(s[0])
                    obs[1] = sin(s[0])
                    obs[2] = cos(s[1])
                    obs[3] = sin(s[1])
                    obs[4] = s[2]
                    obs[5] = s[3]
                    o = obs
                else:
                    o = s
                a = act(rule_start, dims, is_gt, thresholds, actions, fallback, o)
                env_step(env_id, s, a)
                total = total + step_reward
                t += 1
                if env_terminal(env_id, s) or t >= max_steps:
                    break
            returns[e] = total
            steps[e] = t
    return returns_arr, steps_arr


def simulate(int env_id, state0, actions):
    """Raw physics under a fixed action script, ignoring termination."""
    cdef const double[::1] s0 = np.ascontiguousarray(state0, dtype=np.float64)
    cdef const long long[::1] acts = np.ascontiguousarray(actions, dtype=np.int64)
    cdef Py_ssize_t n = acts.shape[0], sdim = s0.shape[0], t, k
    out_arr = np.empty((n, sdim), dtype=np.float64)
    term_arr = np.empty(n, dtype=np.uint8)
    cdef double[:, ::1] out = out_arr
    cdef unsigned char[::1] term = term_arr
    cdef double s[4]
    for k in range(sdim):
        s[k] = s0[k]
    for t in range(n):
        env_step(env_id, s, <int>acts[t])
        for k in range(sdim):
            out[t, k] = s[k]
        term[t] = env_terminal(env_id, s)
    return out_arr, term_arr.astype(bool)
