import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dabf.channel import assemble_channel, draw_channels, steering_vector
from dabf.config import SystemConfig


def test_steering_broadside_quarter_pi():
    # cos(pi/2) = 0: all phases zero.
    np.testing.assert_allclose(steering_vector(np.pi / 2, 4), 0.5 * np.ones(4), atol=1e-15)


def test_steering_endfire_two_elements():
    # cos(0) = 1: phase step of pi.
    expected = np.array([1.0, -1.0]) / np.sqrt(2.0)
    np.testing.assert_allclose(steering_vector(0.0, 2), expected, atol=1e-15)


def test_steering_sixty_degrees_quarter_turns():
    # cos(pi/3) = 1/2: phases step by pi/2.
    expected = 0.5 * np.array([1.0, 1.0j, -1.0, -1.0j])
    np.testing.assert_allclose(steering_vector(np.pi / 3, 4), expected, atol=1e-14)


@given(st.floats(min_value=0.0, max_value=np.pi), st.integers(min_value=1, max_value=64))
def test_steering_unit_norm_and_first_entry(angle, n_tx):
    a = steering_vector(angle, n_tx)
    assert abs(np.linalg.norm(a) - 1.0) < 1e-12
    assert abs(a[0] - 1.0 / np.sqrt(n_tx)) < 1e-15


def test_steering_rejects_empty_array():
    with pytest.raises(ValueError):
        steering_vector(0.3, 0)


def test_single_unit_path_channel():
    # One path, unit gain, broadside: h = sqrt(4) * a = [1, 1, 1, 1].
    h = assemble_channel(np.array([np.pi / 2]), np.array([1.0 + 0.0j]), 4)
    np.testing.assert_allclose(h, np.ones(4), atol=1e-15)


def test_draw_channels_deterministic_given_seed():
    cfg = SystemConfig(n_tx=8, n_rf=4, n_users=2, n_paths=3)
    a = draw_channels(cfg, np.random.default_rng(1234))
    b = draw_channels(cfg, np.random.default_rng(1234))
    assert np.array_equal(a.user_channels, b.user_channels)
    assert np.array_equal(a.path_angles, b.path_angles)
    assert np.array_equal(a.path_gains, b.path_gains)


def test_draw_channels_shapes_and_sensing_norm():
    cfg = SystemConfig(n_tx=16, n_rf=4, n_users=3, n_paths=5)
    ch = draw_channels(cfg, np.random.default_rng(0))
    assert ch.user_channels.shape == (3, 16)
    assert ch.path_angles.shape == (3, 5)
    assert abs(np.linalg.norm(ch.sense_steering) - 1.0) < 1e-12
    assert np.all(ch.path_angles > 0.0) and np.all(ch.path_angles < np.pi)


def test_channel_assembly_matches_definition():
    cfg = SystemConfig(n_tx=8, n_rf=4, n_users=2, n_paths=4)
    ch = draw_channels(cfg, np.random.default_rng(5))
    for k in range(cfg.n_users):
        h = sum(
            ch.path_gains[k, l] * steering_vector(ch.path_angles[k, l], cfg.n_tx)
            for l in range(cfg.n_paths)
        ) * np.sqrt(cfg.n_tx / cfg.n_paths)
        np.testing.assert_allclose(ch.user_channels[k], h, atol=1e-13)


def test_mean_channel_energy_matches_array_size():
    # Monte-Carlo oracle: E||h_k||^2 = n_tx, sampled over 1e5 channel vectors.
    cfg = SystemConfig(n_tx=8, n_rf=8, n_users=5, n_paths=4)
    rng = np.random.default_rng(2024)
    n_calls = 20_000  # 5 users per call -> 1e5 vectors
    total = 0.0
    for _ in range(n_calls):
        ch = draw_channels(cfg, rng)
        total += float(np.sum(np.abs(ch.user_channels) ** 2))
    mean_energy = total / (n_calls * cfg.n_users)
    assert abs(mean_energy - cfg.n_tx) / cfg.n_tx < 0.02


@settings(max_examples=25)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_assembled_channel_matches_path_sum(seed):
    rng = np.random.default_rng(seed)
    n_tx = int(rng.integers(1, 12))
    n_paths = int(rng.integers(1, 6))
    angles = rng.uniform(0, np.pi, n_paths)
    gains = rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths)
    h = assemble_channel(angles, gains, n_tx)
    direct = np.sqrt(n_tx / n_paths) * sum(
        g * steering_vector(t, n_tx) for g, t in zip(gains, angles)
    )
    np.testing.assert_allclose(h, direct, atol=1e-12)
