"""Uniform-linear-array response and multipath channel generation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig


def steering_vector(angle_rad: float, n_tx: int) -> np.ndarray:
    """Half-wavelength ULA response toward ``angle_rad``, unit Euclidean norm.

    Entry m is exp(j*pi*m*cos(angle)) / sqrt(n_tx), m = 0..n_tx-1.
    """
    if n_tx < 1:
        raise ValueError("n_tx must be at least 1")
    m = np.arange(n_tx)
    return np.exp(1j * np.pi * m * np.cos(angle_rad)) / np.sqrt(n_tx)


@dataclass(frozen=True)
class ChannelRealization:
    """Per-user multipath channels plus the sensing link geometry.

    ``user_channels`` is (n_users, n_tx); ``path_angles`` and ``path_gains``
    are (n_users, n_paths). ``sense_steering`` carries the 1/sqrt(n_tx)
    normalization, so its norm is exactly 1.
    """

    user_channels: np.ndarray
    path_angles: np.ndarray
    path_gains: np.ndarray
    sense_steering: np.ndarray
    target_angle_rad: float
    target_gain: complex

    @property
    def n_users(self) -> int:
        return self.user_channels.shape[0]

    @property
    def n_tx(self) -> int:
        return self.user_channels.shape[1]


def assemble_channel(path_angles: np.ndarray, path_gains: np.ndarray, n_tx: int) -> np.ndarray:
    """Build h = sqrt(n_tx/L) * sum_l gain_l * a(angle_l) for one user."""
    n_paths = path_angles.shape[0]
    h = np.zeros(n_tx, dtype=complex)
    for angle, gain in zip(path_angles, path_gains):
        h += gain * steering_vector(angle, n_tx)
    return np.sqrt(n_tx / n_paths) * h


def draw_channels(config: SystemConfig, rng: np.random.Generator) -> ChannelRealization:
    """Sample a channel realization: angles uniform on (0, pi), gains CN(0, 1).

    Deterministic for a given generator state; draw order is angles first,
    then gains.
    """
    k, n_paths, n_tx = config.n_users, config.n_paths, config.n_tx
    angles = rng.uniform(0.0, np.pi, size=(k, n_paths))
    gains = (rng.standard_normal((k, n_paths)) + 1j * rng.standard_normal((k, n_paths))) / np.sqrt(2.0)
    channels = np.stack([assemble_channel(angles[i], gains[i], n_tx) for i in range(k)])
    return ChannelRealization(
        user_channels=channels,
        path_angles=angles,
        path_gains=gains,
        sense_steering=steering_vector(config.target_angle_rad, n_tx),
        target_angle_rad=config.target_angle_rad,
        target_gain=config.target_gain,
    )
