"""Penalized objective and its exact conjugate gradient w.r.t. the precoder.

The objective is the weighted sum of user rates and sensing mutual
information, plus two negative-weighted quadratic penalties tying the
auxiliary moment matrices to their exact values:

    m4 target = |C_x|^2 (entrywise squared modulus), m6 target = m4 .* C_x.

``euclidean_gradient`` returns d(objective)/dF* in the Wirtinger sense, so
for a real objective the differential is 2*Re<dF, grad>.
"""

from __future__ import annotations

import numpy as np

from .channel import ChannelRealization
from .config import SystemConfig
from .metrics import link_terms, weighted_objective_from_terms

_LOG2E = 1.0 / np.log(2.0)


def moment_targets(F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact auxiliary moments (m4, m6) implied by the precoder."""
    cov = F @ F.conj().T
    m4 = np.abs(cov) ** 2
    return m4, m4 * cov


def penalty_values(F: np.ndarray, m4: np.ndarray, m6: np.ndarray) -> tuple[float, float]:
    """Squared Frobenius mismatches of the two moment matrices."""
    cov = F @ F.conj().T
    c1 = float(np.sum(np.abs(m4 - np.abs(cov) ** 2) ** 2))
    c2 = float(np.sum(np.abs(m6 - m4 * cov) ** 2))
    return c1, c2


def penalized_objective(
    F: np.ndarray,
    m4: np.ndarray,
    m6: np.ndarray,
    channels: ChannelRealization,
    config: SystemConfig,
    penalty1: float,
    penalty2: float,
) -> float:
    terms = link_terms(F, channels, config.beta1, config.beta3, config.target_gain)
    _, _, objective = weighted_objective_from_terms(terms, config)
    c1, c2 = penalty_values(F, m4, m6)
    return objective + penalty1 * c1 + penalty2 * c2


def _pair_grad(
    h: np.ndarray,
    F: np.ndarray,
    sig2: np.ndarray,
    z_i: complex,
    i: int,
    beta1: complex,
    beta3: complex,
) -> np.ndarray:
    """d|h^H B f_i|^2 / dF* including the F-dependence of the diagonal gain."""
    out = 2.0 * beta3 * z_i.conjugate() * (F[:, i] * h.conj())[:, None] * F
    out += z_i * 2.0 * beta3.conjugate() * (F[:, i].conj() * h)[:, None] * F
    out[:, i] += z_i * (beta1.conjugate() * h + 2.0 * beta3.conjugate() * (h * sig2))
    return out


def _distortion_grad(h: np.ndarray, cov: np.ndarray, F: np.ndarray, beta3: complex) -> np.ndarray:
    """d(2|beta3|^2 h^H (C_x .* |C_x|^2) h) / dF*."""
    outer = np.outer(h, h.conj())
    core = 2.0 * outer * cov * cov.conj() + outer.conj() * cov * cov
    return 2.0 * abs(beta3) ** 2 * (core @ F)


def euclidean_gradient(
    F: np.ndarray,
    m4: np.ndarray,
    m6: np.ndarray,
    channels: ChannelRealization,
    config: SystemConfig,
    penalty1: float,
    penalty2: float,
) -> np.ndarray:
    """Conjugate Wirtinger gradient of the penalized objective at F."""
    n_tx, k = F.shape
    if channels.user_channels.shape != (config.n_users, config.n_tx) or k != config.n_users:
        raise ValueError("precoder/channel dimensions do not match the configuration")
    beta1, beta3 = config.beta1, config.beta3
    cov = F @ F.conj().T
    sig2 = np.real(np.diag(cov))
    gain_diag = beta1 + 2.0 * beta3 * sig2

    H = channels.user_channels
    rx = (H.conj() * gain_diag[None, :]) @ F  # rx[u, i] = h_u^H B f_i
    powers = np.abs(rx) ** 2
    dist_core = cov * np.abs(cov) ** 2
    d3 = 2.0 * abs(beta3) ** 2
    user_dist = d3 * np.real(np.einsum("ki,ij,kj->k", H.conj(), dist_core, H))

    grad = np.zeros_like(F)
    noise = config.noise_user_array
    for u in range(k):
        h = H[u]
        s_grad = _pair_grad(h, F, sig2, rx[u, u], u, beta1, beta3)
        i_grad = np.zeros_like(F)
        for i in range(k):
            if i != u:
                i_grad += _pair_grad(h, F, sig2, rx[u, i], i, beta1, beta3)
        n_grad = i_grad + _distortion_grad(h, cov, F, beta3)
        s_val = powers[u, u]
        n_val = powers[u].sum() - s_val + user_dist[u] + noise[u]
        scale = config.weight_comm * _LOG2E / (1.0 + s_val / n_val)
        grad += scale * (n_val * s_grad - s_val * n_grad) / n_val**2

    a = channels.sense_steering
    gain_abs2 = abs(config.target_gain) ** 2
    arx = (a.conj() * gain_diag) @ F
    ss_grad = np.zeros_like(F)
    for i in range(k):
        ss_grad += _pair_grad(a, F, sig2, arx[i], i, beta1, beta3)
    ss_grad *= gain_abs2
    ns_grad = gain_abs2 * _distortion_grad(a, cov, F, beta3)
    ss_val = gain_abs2 * float(np.sum(np.abs(arx) ** 2))
    ns_val = d3 * gain_abs2 * float(np.real(a.conj() @ dist_core @ a)) + config.noise_sense
    scale = config.weight_sense * _LOG2E / (1.0 + ss_val / ns_val)
    grad += scale * (ns_val * ss_grad - ss_val * ns_grad) / ns_val**2

    grad += penalty1 * _moment4_penalty_grad(cov, m4, F)
    grad += penalty2 * _moment6_penalty_grad(cov, m4, m6, F)
    return grad


def _moment4_penalty_grad(cov: np.ndarray, m4: np.ndarray, F: np.ndarray) -> np.ndarray:
    """d||m4 - |C_x|^2||_F^2 / dF*."""
    re_sym = np.real(m4) + np.real(m4).T
    return 4.0 * (cov * cov * cov.conj()) @ F - 2.0 * (re_sym * cov) @ F


def _moment6_penalty_grad(
    cov: np.ndarray, m4: np.ndarray, m6: np.ndarray, F: np.ndarray
) -> np.ndarray:
    """d||m6 - m4 .* C_x||_F^2 / dF*."""
    quad = (m4 * m4.conj() * cov + m4.T * m4.conj().T * cov) @ F
    cross = (m6 * m4.conj() + m6.conj().T * m4.T) @ F
    return quad - cross
