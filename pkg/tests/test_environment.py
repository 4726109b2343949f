import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from restartucb.environment import (
    ArmSet,
    Environment,
    NoiseModel,
    ParameterPath,
    best_reward,
    path_length,
    sample_arms,
    theta_at,
)


def test_abrupt_schedule_values():
    T = 50_000
    path = ParameterPath("abrupt", T)
    np.testing.assert_array_equal(theta_at(path, 1), [1, 0])
    assert path.change_points == [6251, 12501, 18751, 25001]
    expected = {6250: [1, 0], 6251: [-1, 0], 12501: [0, 1], 18751: [0, -1], 25000: [0, -1],
                25001: [1, 0], T: [1, 0]}
    for t, v in expected.items():
        np.testing.assert_array_equal(path.theta_at(t), v)


def test_gradual_endpoints_and_midpoint():
    T = 50_001
    path = ParameterPath("gradual", T)
    np.testing.assert_allclose(path.theta_at(1), [1, 0])
    np.testing.assert_allclose(path.theta_at(T), [-1, 0], atol=1e-15)
    np.testing.assert_allclose(path.theta_at((T + 1) // 2), [0, 1], atol=1e-15)


def test_theta_out_of_range():
    path = ParameterPath("gradual", 10)
    for t in (0, 11):
        with pytest.raises(ValueError):
            path.theta_at(t)


def test_thetas_array_matches_pointwise():
    for kind in ("abrupt", "gradual"):
        path = ParameterPath(kind, 97)
        th = path.thetas()
        for t in range(1, 98):
            np.testing.assert_allclose(th[t - 1], path.theta_at(t))


def test_path_length_constant():
    assert path_length(ParameterPath("constant", 100, 3)) == 0.0


def test_path_length_abrupt():
    # jumps: [1,0]->[-1,0]->[0,1]->[0,-1]->[1,0]
    jumps = [2.0, math.sqrt(2.0), 2.0, math.sqrt(2.0)]
    assert path_length(ParameterPath("abrupt", 50_000)) == pytest.approx(sum(jumps), rel=1e-12)
    assert sum(jumps) == pytest.approx(6.8284, abs=1e-4)


def test_path_length_gradual_chord_sum():
    T = 50_000
    chord = (T - 1) * 2 * math.sin(math.pi / (2 * (T - 1)))
    got = path_length(ParameterPath("gradual", T))
    assert got == pytest.approx(chord, abs=1e-9)
    assert abs(got - math.pi) <= 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 3000), st.integers(1, 500))
def test_gradual_length_bounded_and_monotone(T, extra):
    a = path_length(ParameterPath("gradual", T))
    b = path_length(ParameterPath("gradual", T + extra))
    assert a <= math.pi + 1e-12
    assert a <= b + 1e-12


@pytest.mark.parametrize("kind", ["abrupt", "gradual"])
def test_unit_norm_parameters(kind):
    th = ParameterPath(kind, 1001).thetas()
    np.testing.assert_allclose(np.linalg.norm(th, axis=1), 1.0)


def test_custom_path_piecewise_constant():
    path = ParameterPath("custom", 10, 2, change_points=[4, 8], values=[[1, 0], [0, 1], [0.5, 0.5]])
    assert [tuple(path.theta_at(t)) for t in (1, 3, 4, 7, 8, 10)] == [
        (1, 0), (1, 0), (0, 1), (0, 1), (0.5, 0.5), (0.5, 0.5)]
    assert path_length(path) == pytest.approx(math.sqrt(2) + math.sqrt(0.5))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="custom", T=10, change_points=[1], values=[[1, 0], [0, 1]]),
        dict(kind="custom", T=10, change_points=[11], values=[[1, 0], [0, 1]]),
        dict(kind="custom", T=10, change_points=[5, 3], values=[[1, 0], [0, 1], [1, 0]]),
        dict(kind="custom", T=10, change_points=[5], values=[[1, 0]]),
        dict(kind="constant", T=10, values=[2.0, 0.0]),
        dict(kind="abrupt", T=10, d=3),
        dict(kind="wiggly", T=10),
    ],
)
def test_invalid_paths(kwargs):
    with pytest.raises(ValueError):
        ParameterPath(**kwargs)


def test_sample_arms_norm_and_shape():
    arms = sample_arms(20, 2, 1.0, np.random.default_rng(0))
    assert arms.arms.shape == (20, 2)
    assert np.all(np.linalg.norm(arms.arms, axis=1) <= 1.0 + 1e-12)


def test_sample_arms_deterministic():
    a = sample_arms(20, 3, 1.0, np.random.default_rng(7))
    b = sample_arms(20, 3, 1.0, np.random.default_rng(7))
    np.testing.assert_array_equal(a.arms, b.arms)


def test_sample_arms_preserves_feasible_arms():
    rng = np.random.default_rng(1)
    raw = np.random.default_rng(1).standard_normal((50, 2))
    arms = sample_arms(50, 2, 10.0, rng).arms
    small = np.linalg.norm(raw, axis=1) <= 10.0
    np.testing.assert_array_equal(arms[small], raw[small])


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 40), st.integers(1, 6), st.floats(0.01, 5), st.integers(0, 2**32 - 1))
def test_sample_arms_respect_L(n, d, L, seed):
    arms = sample_arms(n, d, L, np.random.default_rng(seed))
    assert np.all(np.linalg.norm(arms.arms, axis=1) <= L * (1 + 1e-12))


def _env(path, std, seed=0, n=5):
    return Environment(path, n, NoiseModel(std), np.random.default_rng(seed))


def test_pull_noiseless():
    env = _env(ParameterPath("constant", 10, values=[1.0, 0.0]), 0.0)
    assert env.pull([1.0, 0.0], 1) == 1.0
    assert env.pull([0.0, 1.0], 2) == 0.0


def test_pull_out_of_range():
    env = _env(ParameterPath("constant", 10), 0.0)
    with pytest.raises(ValueError):
        env.pull([1.0, 0.0], 11)


def test_pull_monte_carlo_mean():
    T = 1_000_000
    theta = np.array([0.6, 0.8])
    x = np.array([0.3, -0.5])
    env = _env(ParameterPath("constant", T, values=theta), 0.1, seed=3)
    mean = (x @ theta + env.eta).mean()
    assert abs(mean - x @ theta) <= 3e-4
    assert env.pull(x, 17) == pytest.approx(x @ theta + env.eta[16])


def test_environment_is_seed_deterministic():
    path = ParameterPath("gradual", 100)
    a, b = _env(path, 0.1, seed=9), _env(path, 0.1, seed=9)
    np.testing.assert_array_equal(a.arm_seq, b.arm_seq)
    np.testing.assert_array_equal(a.eta, b.eta)


def test_resampled_arms_differ_per_round():
    env = Environment(ParameterPath("gradual", 20), 4, NoiseModel(0.1), np.random.default_rng(0),
                      resample_arms=True)
    assert env.arm_seq.shape == (20, 4, 2)
    assert not np.array_equal(env.arms_at(1).arms, env.arms_at(2).arms)


def test_noise_model():
    assert NoiseModel(0.1).R == 0.1
    with pytest.raises(ValueError):
        NoiseModel(-1.0)
    with pytest.raises(ValueError):
        NoiseModel(0.2, R=0.1)


def test_best_reward_examples():
    arms = ArmSet(np.eye(2))
    assert best_reward(arms, [1.0, 0.0]) == (1.0, 0)
    assert best_reward(arms, [0.0, 0.0]) == (0.0, 0)


def test_best_reward_matches_scan():
    rng = np.random.default_rng(11)
    for _ in range(200):
        arms = sample_arms(20, 3, 1.0, rng)
        theta = rng.standard_normal(3)
        best, idx = None, None
        for i, x in enumerate(arms.arms):
            v = sum(a * b for a, b in zip(x, theta))
            if best is None or v > best:
                best, idx = v, i
        got, gi = best_reward(arms, theta)
        assert gi == idx
        assert got == pytest.approx(best, abs=1e-12)
