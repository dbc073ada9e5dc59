import math

import numpy as np
import pytest

from conftest import FIXTURE_DIR, load_fixture, reference_policy
from oracles import reference_dynamics as ref
from ruleevo.envs import (ACROBOT, CARTPOLE, MOUNTAINCAR, SPECS, Environment, acrobot_observe, get_spec,
                          initial_state, make_env)
from ruleevo.errors import ConfigError, EnvUsageError
from ruleevo.policy import eval_policy

FIXTURES = sorted(FIXTURE_DIR.glob("*.csv"))


def test_spec_table():
    assert (SPECS["cartpole"].obs_dim, SPECS["cartpole"].action_count, SPECS["cartpole"].max_steps,
            SPECS["cartpole"].solve_threshold) == (4, 2, 500, 500.0)
    assert (SPECS["mountaincar"].obs_dim, SPECS["mountaincar"].action_count, SPECS["mountaincar"].max_steps,
            SPECS["mountaincar"].solve_threshold) == (2, 3, 200, -110.0)
    assert (SPECS["acrobot"].obs_dim, SPECS["acrobot"].action_count, SPECS["acrobot"].max_steps,
            SPECS["acrobot"].solve_threshold) == (6, 3, 500, -100.0)


def test_unknown_env():
    with pytest.raises(ConfigError):
        make_env("pendulum", 0)


@pytest.mark.parametrize("seed", [0, 1, 17, 2**40])
def test_mountaincar_starts_at_rest(seed):
    s = make_env("mountaincar", seed).reset()
    assert s[1] == 0.0
    assert -0.6 <= s[0] <= -0.4


def test_cartpole_reset_deterministic():
    assert make_env("cartpole", 11).reset() == make_env("cartpole", 11).reset()


def test_successive_resets_differ():
    env = make_env("cartpole", 11)
    assert env.reset() != env.reset()


@pytest.mark.parametrize("name,lo,hi", [("cartpole", -0.05, 0.05), ("acrobot", -0.1, 0.1)])
def test_reset_ranges(name, lo, hi):
    for seed in range(50):
        s = initial_state(get_spec(name), seed)
        assert all(lo <= v <= hi for v in s)


def test_acrobot_zero_angles_observation():
    assert acrobot_observe([0.0, 0.0, 0.0, 0.0]) == [1.0, 0.0, 1.0, 0.0, 0.0, 0.0]
    env = make_env("acrobot", 0)
    assert env.set_internal_state([0.0, 0.0, 0.0, 0.0]) == [1.0, 0.0, 1.0, 0.0, 0.0, 0.0]


def test_cartpole_first_step_from_rest_matches_oracle():
    env = make_env("cartpole", 0)
    env.set_internal_state([0.0, 0.0, 0.0, 0.0])
    res = env.step(1)
    expected, term = ref.cartpole(np.zeros(4), 1)
    np.testing.assert_allclose(res.state, expected, rtol=0, atol=1e-9)
    assert res.state[1] == pytest.approx(0.1951, abs=1e-4)
    assert res.reward == 1.0 and not res.done


def test_mountaincar_no_push_velocity_update():
    env = make_env("mountaincar", 0)
    env.set_internal_state([-0.5, 0.0])
    res = env.step(1)
    # v' = v + 0.001*(a-1) - 0.0025*cos(3x) at x=-0.5, a=1
    assert res.state[1] == pytest.approx(-0.0025 * math.cos(-1.5), abs=1e-15)
    assert res.state[1] == pytest.approx(-0.0001768, abs=1e-7)
    assert res.state[0] == pytest.approx(-0.5 + res.state[1], abs=1e-15)


@pytest.mark.parametrize("name,action", [("mountaincar", 1), ("acrobot", 1)])
def test_truncation_at_max_steps(name, action):
    env = make_env(name, 0)
    env.reset()
    spec = env.spec
    for t in range(1, spec.max_steps + 1):
        res = env.step(action)
        assert res.done == (t == spec.max_steps)
    assert res.truncated and not res.terminated
    with pytest.raises(EnvUsageError):
        env.step(action)


def test_cartpole_truncates_under_balancing_policy():
    policy = reference_policy("cartpole")
    # seed 1 is an episode the reference policy balances for the full horizon
    env = make_env("cartpole", 1)
    obs, steps = env.reset(), 0
    while True:
        res = env.step(eval_policy(policy, obs))
        obs, steps = res.state, steps + 1
        if res.done:
            break
    assert steps == 500 and res.truncated


def test_step_before_reset_is_usage_error():
    with pytest.raises(EnvUsageError):
        make_env("cartpole", 0).step(0)


def test_invalid_action():
    env = make_env("cartpole", 0)
    env.reset()
    with pytest.raises(EnvUsageError):
        env.step(2)


@pytest.mark.parametrize("name", ["cartpole", "mountaincar", "acrobot"])
def test_seed_determinism_full_trajectory(name):
    actions = np.random.default_rng(5).integers(get_spec(name).action_count, size=300)

    def run():
        env, out = make_env(name, 99), []
        out.append(env.reset())
        for a in actions:
            r = env.step(int(a))
            out.append((r.state, r.reward, r.done))
            if r.done:
                break
        return out

    assert run() == run()


@pytest.mark.parametrize("name", ["cartpole", "mountaincar", "acrobot"])
def test_bounds_and_returns(name):
    spec = get_spec(name)
    rng = np.random.default_rng(2)
    for seed in range(20):
        env = make_env(name, seed)
        env.reset()
        total = 0.0
        while True:
            r = env.step(int(rng.integers(spec.action_count)))
            total += r.reward
            assert all(math.isfinite(v) for v in r.state)
            assert r.reward == spec.step_reward
            s = env.internal_state
            if spec.env_id == MOUNTAINCAR:
                assert -1.2 <= s[0] <= 0.6 and -0.07 <= s[1] <= 0.07
            if spec.env_id == ACROBOT:
                assert -4 * math.pi <= s[2] <= 4 * math.pi and -9 * math.pi <= s[3] <= 9 * math.pi
                assert -math.pi <= s[0] <= math.pi and -math.pi <= s[1] <= math.pi
            if r.done:
                break
        if spec.env_id == CARTPOLE:
            assert 1 <= total <= 500
        else:
            assert -spec.max_steps <= total <= -1


# fixture parity ------------------------------------------------------------

def _fixture_env(path):
    return path.name.split("_")[0]


def test_fixture_set_complete():
    assert len(FIXTURES) == 9
    for env in ("cartpole", "mountaincar", "acrobot"):
        assert len([p for p in FIXTURES if _fixture_env(p) == env]) == 3


@pytest.mark.parametrize("path", FIXTURES, ids=lambda p: p.stem)
def test_kernel_physics_matches_fixture(path, backend):
    env = _fixture_env(path)
    spec = get_spec(env)
    actions, obs, rewards, done = load_fixture(path)
    assert len(actions) == 201
    state0 = ref.state_from_obs(env, obs[0])
    states, terminated = backend.simulate(spec.env_id, state0, actions[1:])
    ours = np.array([acrobot_observe(s) for s in states]) if spec.env_id == ACROBOT else states
    np.testing.assert_allclose(ours, obs[1:], rtol=0, atol=1e-6)
    steps = np.arange(1, 201)
    np.testing.assert_array_equal(terminated | (steps >= spec.max_steps), done[1:])


@pytest.mark.parametrize("path", FIXTURES, ids=lambda p: p.stem)
def test_environment_step_matches_fixture_until_done(path):
    env_name = _fixture_env(path)
    actions, obs, rewards, done = load_fixture(path)
    env = Environment(get_spec(env_name), 0)
    first = env.set_internal_state(ref.state_from_obs(env_name, obs[0]))
    np.testing.assert_allclose(first, obs[0], atol=1e-12)
    for t in range(1, len(actions)):
        r = env.step(int(actions[t]))
        np.testing.assert_allclose(r.state, obs[t], rtol=0, atol=1e-6)
        assert r.reward == rewards[t]
        assert r.done == done[t]
        if r.done:
            break


@pytest.mark.parametrize("name", ["cartpole", "mountaincar", "acrobot"])
def test_oracle_start_states_match(name):
    for seed in range(10):
        np.testing.assert_array_equal(initial_state(get_spec(name), seed), ref.reset(name, seed))


GYM_IDS = {"cartpole": "CartPole-v1", "mountaincar": "MountainCar-v0", "acrobot": "Acrobot-v1"}


@pytest.mark.parametrize("name", list(GYM_IDS))
def test_matches_gymnasium_when_installed(name):
    gym = pytest.importorskip("gymnasium")
    spec = get_spec(name)
    env = gym.make(GYM_IDS[name]).unwrapped
    env.reset(seed=3)
    state0 = np.array(env.state, dtype=np.float64)
    actions = np.random.default_rng(0).integers(spec.action_count, size=200)
    ref_states = []
    for a in actions:
        env.step(int(a))
        ref_states.append(np.array(env.state, dtype=np.float64))
    from ruleevo import kernel
    ours, _ = kernel.simulate(spec.env_id, state0, actions)
    np.testing.assert_allclose(ours, np.array(ref_states), rtol=0, atol=1e-6)
