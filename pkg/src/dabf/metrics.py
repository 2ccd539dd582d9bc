"""Link-quality metrics: per-user SINDR, sensing SNDR, weighted objective."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .config import SystemConfig
from .distortion import DistortionModel, radiated_power


@dataclass(frozen=True)
class MetricsReport:
    user_sindr: np.ndarray  # (n_users,)
    user_rates: np.ndarray  # (n_users,) bits/s/Hz
    sense_sndr: float
    sense_mi: float
    weighted_objective: float
    radiated_power: float  # mW


@dataclass(frozen=True)
class LinkTerms:
    """Signal/interference/distortion powers entering the rate expressions.

    ``signal``/``interference``/``distortion`` are per-user arrays; the
    ``sense_*`` scalars are the sensing-link analogues.
    """

    signal: np.ndarray
    interference: np.ndarray
    distortion: np.ndarray
    sense_signal: float
    sense_distortion: float


def link_terms(
    F: np.ndarray,
    channels: ChannelRealization,
    beta1: complex,
    beta3: complex,
    target_gain: complex,
) -> LinkTerms:
    """Evaluate the quadratic forms behind SINDR and sensing SNDR for F."""
    cov = F @ F.conj().T
    gain_diag = beta1 + 2.0 * beta3 * np.real(np.diag(cov))
    dist_core = cov * np.abs(cov) ** 2  # C_x .* |C_x|^2
    d3 = 2.0 * abs(beta3) ** 2

    H = channels.user_channels  # (K, n_tx)
    # rx[k, i] = h_k^H B f_i
    rx = (H.conj() * gain_diag[None, :]) @ F
    powers = np.abs(rx) ** 2
    signal = np.diag(powers).copy()
    interference = powers.sum(axis=1) - signal
    distortion = d3 * np.real(np.einsum("ki,ij,kj->k", H.conj(), dist_core, H))

    a = channels.sense_steering
    arx = (a.conj() * gain_diag) @ F
    sense_signal = abs(target_gain) ** 2 * float(np.sum(np.abs(arx) ** 2))
    sense_distortion = (
        d3 * abs(target_gain) ** 2 * float(np.real(a.conj() @ dist_core @ a))
    )
    return LinkTerms(signal, interference, distortion, sense_signal, sense_distortion)


def user_sindr(
    h: np.ndarray,
    F: np.ndarray,
    k: int,
    distortion: DistortionModel,
    noise: float,
) -> float:
    """SINDR of the user with channel h served by column k of F."""
    rx = (h.conj() * distortion.gain_diag) @ F
    powers = np.abs(rx) ** 2
    interference = float(np.sum(powers) - powers[k])
    dist = float(np.real(h.conj() @ distortion.distortion_cov @ h))
    return float(powers[k] / (interference + dist + noise))


def sensing_sndr(
    steering: np.ndarray,
    target_gain: complex,
    F: np.ndarray,
    distortion: DistortionModel,
    noise: float,
) -> float:
    """SNDR of the monostatic sensing link toward ``steering``."""
    rx = (steering.conj() * distortion.gain_diag) @ F
    signal = abs(target_gain) ** 2 * float(np.sum(np.abs(rx) ** 2))
    dist = abs(target_gain) ** 2 * float(
        np.real(steering.conj() @ distortion.distortion_cov @ steering)
    )
    return signal / (dist + noise)


def weighted_objective_from_terms(
    terms: LinkTerms, config: SystemConfig
) -> tuple[np.ndarray, float, float]:
    """(per-user SINDR, sensing SNDR, weighted rate objective) from powers."""
    noise = config.noise_user_array
    gammas = terms.signal / (terms.interference + terms.distortion + noise)
    gamma_s = terms.sense_signal / (terms.sense_distortion + config.noise_sense)
    rates = np.log2(1.0 + gammas)
    mi = np.log2(1.0 + gamma_s)
    objective = config.weight_comm * float(rates.sum()) + config.weight_sense * float(mi)
    return gammas, float(gamma_s), objective


def weighted_objective(F: np.ndarray, channels: ChannelRealization, config: SystemConfig) -> float:
    """Weighted sum of user rates and sensing MI (no penalty terms)."""
    terms = link_terms(F, channels, config.beta1, config.beta3, config.target_gain)
    return weighted_objective_from_terms(terms, config)[2]


def evaluate_metrics(
    channels: ChannelRealization,
    precoder: np.ndarray,
    config: SystemConfig,
) -> MetricsReport:
    """Full metrics report for a digital precoder (n_tx, n_users).

    For a hybrid pair, pass the product analog @ digital.
    """
    F = np.asarray(precoder)
    if F.shape != (config.n_tx, config.n_users):
        raise ValueError(f"precoder must be ({config.n_tx}, {config.n_users}), got {F.shape}")
    terms = link_terms(F, channels, config.beta1, config.beta3, config.target_gain)
    gammas, gamma_s, objective = weighted_objective_from_terms(terms, config)
    power, _, _ = radiated_power(F, config.beta1, config.beta3)
    return MetricsReport(
        user_sindr=gammas,
        user_rates=np.log2(1.0 + gammas),
        sense_sndr=gamma_s,
        sense_mi=float(np.log2(1.0 + gamma_s)),
        weighted_objective=objective,
        radiated_power=power,
    )
