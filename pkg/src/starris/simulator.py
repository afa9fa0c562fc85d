"""Realized-system evaluation: effective channel, SINR, achievable rate,
interference reporting, baselines, and Monte Carlo averaging.

Each user's composite row combines its direct link with the cascade over the
surface (its own mode's phase profile and phase-error realization). Stacking
the rows against a precoder gives the K x K effective coupling matrix whose
diagonal carries the desired streams and off-diagonal the inter-user
interference. The precoder is matched to the statistically expected rows:
with only channel statistics at the transmitter, maximum ratio transmission
against the expected composite row is the minimal consistent choice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import (
    ChannelSet,
    PhaseNoiseRealization,
    PhaseProfile,
    SystemConfig,
    bs_departure_response,
    direct_los,
    mode_index,
    sample_phase_noise,
    sample_rician,
)
from .circular import wrap_angle
from .statcsi import expected_cascaded

__all__ = [
    "SchemeSummary",
    "composite_row",
    "effective_matrix",
    "expected_composite_row",
    "mrt_precoder",
    "sinr",
    "achievable_rate",
    "interference_power",
    "random_phase_baseline",
    "evaluate_scheme",
]


def composite_row(
    config: SystemConfig,
    channels: ChannelSet,
    theta: PhaseProfile,
    noise: PhaseNoiseRealization,
    k: int,
) -> np.ndarray:
    """Realized 1 x M row of user k: conjugated direct link plus the
    RIS-user row through the surface phases, phase errors, and the
    conjugate-transposed BS-RIS matrix."""
    i = mode_index(config.modes[k])
    phases = np.exp(1j * (theta.angles()[i] + noise.angles[i]))
    cascade = (channels.ris_user[k].conj() * phases) @ channels.bs_ris.conj().T
    return channels.direct[k].conj() + cascade


def effective_matrix(
    config: SystemConfig,
    channels: ChannelSet,
    theta: PhaseProfile,
    noise: PhaseNoiseRealization,
    precoder: np.ndarray,
) -> np.ndarray:
    """K x K coupling matrix: entry (k, j) couples stream j into user k."""
    if precoder.shape != (config.M, config.K):
        raise ValueError(f"precoder must have shape (M, K), got {precoder.shape}")
    rows = np.stack([composite_row(config, channels, theta, noise, k) for k in range(config.K)])
    return rows @ precoder


def expected_composite_row(config: SystemConfig, theta: PhaseProfile, k: int) -> np.ndarray:
    """Statistically expected composite row of user k: the LoS direct part
    scaled by its Rician fraction, plus the expected cascaded entry spread
    over the BS departure response."""
    beta = config.beta_bk[k]
    direct = (
        np.sqrt(config.alpha_bk[k])
        * np.sqrt(beta / (beta + 1.0))
        * direct_los(config, k).conj()
    )
    cascade_scalar = expected_cascaded(config, theta, k)
    cascade = (cascade_scalar / config.M) * bs_departure_response(config).conj()
    return direct + cascade


def mrt_precoder(config: SystemConfig, theta: PhaseProfile) -> np.ndarray:
    """Unit-norm maximum-ratio columns matched to the expected composite rows,
    shape (M, K)."""
    cols = np.empty((config.M, config.K), dtype=complex)
    for k in range(config.K):
        row = expected_composite_row(config, theta, k)
        norm = np.linalg.norm(row)
        if norm < 1e-300:
            raise ValueError(f"expected composite row of user {k} is zero")
        cols[:, k] = row.conj() / norm
    return cols


def sinr(G: np.ndarray, sigma2: float) -> np.ndarray:
    """Per-user SINR: squared desired coupling over interference plus noise."""
    if sigma2 <= 0:
        raise ValueError(f"sigma2 must be > 0, got {sigma2}")
    power = np.abs(G) ** 2
    desired = np.diag(power)
    interference = power.sum(axis=1) - desired
    return desired / (interference + sigma2)


def achievable_rate(gammas: np.ndarray) -> float:
    """Sum rate in bits/s/Hz: sum of log2(1 + SINR)."""
    gammas = np.asarray(gammas, dtype=float)
    if np.any(gammas < 0):
        raise ValueError("SINRs must be >= 0")
    return float(np.log2(1.0 + gammas).sum())


def interference_power(G: np.ndarray) -> float:
    """Total off-diagonal coupling power."""
    power = np.abs(G) ** 2
    return float(power.sum() - np.trace(power))


def random_phase_baseline(config: SystemConfig, rng: np.random.Generator) -> PhaseProfile:
    """Independent uniform phases on (-pi, pi] for each element and mode."""
    angles = rng.uniform(-np.pi, np.pi, size=(2, config.N))
    return PhaseProfile(np.exp(1j * wrap_angle(angles)))


@dataclass(frozen=True)
class SchemeSummary:
    """Monte Carlo averages (and standard errors) of one phase configuration."""

    trials: int
    mean_rate: float
    se_rate: float
    mean_sinr: np.ndarray
    se_sinr: np.ndarray
    mean_interference: float
    se_interference: float


def evaluate_scheme(
    config: SystemConfig,
    theta: PhaseProfile,
    trials: int,
    rng: np.random.Generator,
) -> SchemeSummary:
    """Average rate, per-user SINR, and interference power of a fixed phase
    profile over ``trials`` independent channel and phase-error draws.

    Each trial consumes its own child stream of ``rng``, so aggregation is
    independent of trial order and two calls with identically seeded
    generators see identical draws (paired comparisons).
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    precoder = mrt_precoder(config, theta)
    streams = rng.spawn(trials)

    rates = np.empty(trials)
    sinrs = np.empty((trials, config.K))
    interferences = np.empty(trials)
    for t, stream in enumerate(streams):
        channels = sample_rician(config, stream)
        noise = sample_phase_noise(config, stream)
        G = effective_matrix(config, channels, theta, noise, precoder)
        gammas = sinr(G, config.sigma2)
        sinrs[t] = gammas
        rates[t] = achievable_rate(gammas)
        interferences[t] = interference_power(G)

    def _se(x: np.ndarray) -> np.ndarray:
        if trials == 1:
            return np.zeros(x.shape[1:]) if x.ndim > 1 else 0.0
        return x.std(axis=0, ddof=1) / np.sqrt(trials)

    return SchemeSummary(
        trials=trials,
        mean_rate=float(rates.mean()),
        se_rate=float(_se(rates)),
        mean_sinr=sinrs.mean(axis=0),
        se_sinr=_se(sinrs),
        mean_interference=float(interferences.mean()),
        se_interference=float(_se(interferences)),
    )
