"""Compiled and pure-Python rollout kernels must agree bit for bit."""

import numpy as np
import pytest

from ruleevo import _pykernel, kernel
from ruleevo.envs import get_spec, initial_state, make_env
from ruleevo.evolution import VariationConfig, random_policy
from ruleevo.policy import eval_policy

pytestmark = pytest.mark.skipif(not kernel.compiled_available(), reason="compiled kernel not built")

ENVS = ["cartpole", "mountaincar", "acrobot"]


def test_default_backend_is_compiled():
    assert kernel.BACKEND == "cython"


@pytest.mark.parametrize("name", ENVS)
def test_rollouts_identical_across_backends(name):
    from ruleevo import _ckernel
    spec = get_spec(name)
    cfg = VariationConfig.for_env(spec)
    rng = np.random.default_rng(3)
    states0 = np.array([initial_state(spec, s) for s in range(8)])
    for _ in range(40):
        p = random_policy(cfg, rng)
        args = (spec.env_id, states0, *p.flat(), spec.max_steps, spec.step_reward)
        rc, sc = _ckernel.rollout_batch(*args)
        rp, sp = _pykernel.rollout_batch(*args)
        np.testing.assert_array_equal(rc, rp)
        np.testing.assert_array_equal(sc, sp)


@pytest.mark.parametrize("name", ENVS)
def test_simulate_identical_across_backends(name):
    from ruleevo import _ckernel
    spec = get_spec(name)
    actions = np.random.default_rng(4).integers(spec.action_count, size=400)
    for seed in range(5):
        s0 = initial_state(spec, seed)
        a, ta = _ckernel.simulate(spec.env_id, s0, actions)
        b, tb = _pykernel.simulate(spec.env_id, s0, actions)
        np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(ta, tb)


@pytest.mark.parametrize("name", ENVS)
def test_kernel_rollout_matches_stepwise_environment(name, backend):
    spec = get_spec(name)
    cfg = VariationConfig.for_env(spec)
    rng = np.random.default_rng(8)
    for seed in range(10):
        p = random_policy(cfg, rng)
        env = make_env(name, seed)
        obs, total, steps = env.reset(), 0.0, 0
        while True:
            r = env.step(eval_policy(p, obs))
            obs, total, steps = r.state, total + r.reward, steps + 1
            if r.done:
                break
        ret, n = backend.rollout_batch(spec.env_id, np.array([initial_state(spec, seed)]), *p.flat(),
                                       spec.max_steps, spec.step_reward)
        assert ret[0] == total and n[0] == steps

