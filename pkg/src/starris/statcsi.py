"""Closed-form statistical-CSI approximation of the expected effective channel
entry per user, together with a Monte Carlo estimator used to validate it.

The expected entry splits into a direct part, driven by the BS-array cosine
sum ``lambda_m``, and a cascaded part, driven by the phase-noise-weighted
coupling factor ``lambda_mn``. The coupling factor combines a pairwise RIS
coherence sum (numerator) with a BS/RIS alignment sum (denominator); both are
evaluated in O(M + N) through resultant-vector identities instead of explicit
double loops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import (
    ChannelSet,
    PhaseProfile,
    SystemConfig,
    bs_ris_los,
    direct_los,
    mode_index,
    ris_user_los,
)
from .circular import VonMisesParams, concentration_factor, sample_von_mises

__all__ = [
    "DegenerateDenominatorError",
    "ClosedFormTerms",
    "lambda_m",
    "xi_m",
    "lambda_mn",
    "expected_direct",
    "expected_cascaded",
    "expected_effective_entry",
    "monte_carlo_effective_entry",
    "closed_form_terms",
    "user_pair_phases",
    "den_ris_phases",
    "den_bs_phases",
]

DENOMINATOR_FLOOR = 1e-9


class DegenerateDenominatorError(RuntimeError):
    """The alignment sum in the coupling factor is numerically zero; the
    quotient (and its gradient, which divides by its square) is undefined."""


@dataclass(frozen=True)
class ClosedFormTerms:
    """Per-user ingredients of the closed-form expected entry, evaluated at
    one phase profile: each user under its own surface mode."""

    lambda_m: np.ndarray   # (K,) real BS cosine sums
    xi_m: np.ndarray       # (K,) complex NLoS sums (zero in statistical mode)
    lambda_mn: np.ndarray  # (K,) real coupling factors
    chi: float


def lambda_m(config: SystemConfig, k: int) -> float:
    """BS-array cosine sum for user k: sum_m cos(2 pi a m sin(phi_bk)/wavelength)."""
    _check_user(config, k)
    m = np.arange(config.M)
    phase = (2.0 * np.pi / config.wavelength) * config.a * m * np.sin(config.phi_bk[k])
    return float(np.cos(phase).sum())


def xi_m(config: SystemConfig, k: int, channels: ChannelSet | None = None) -> complex:
    """NLoS contribution to the expected direct entry.

    Statistical mode (``channels`` is None) returns 0: the NLoS entries are
    zero-mean. With a realization, returns the realized gain-scaled sum of
    conjugated NLoS entries of user k's direct link.
    """
    _check_user(config, k)
    if channels is None:
        return 0.0 + 0.0j
    alpha = config.alpha_bk[k]
    beta = config.beta_bk[k]
    h_sum = channels.direct[k].conj().sum()
    los_sum = channels.los_direct[k].conj().sum()
    nlos_sum = np.sqrt(beta + 1.0) * (h_sum / np.sqrt(alpha) - np.sqrt(beta / (beta + 1.0)) * los_sum)
    return complex(np.sqrt(alpha) * nlos_sum)


def user_pair_phases(config: SystemConfig, k: int) -> np.ndarray:
    """Geometric phases of the RIS pairwise coherence sum for user k, length N."""
    x, z = config.element_coords()
    scale = 2.0 * np.pi / config.wavelength * config.d
    return scale * (x * config.a_rk()[k] + z * config.b_rk()[k])


def den_ris_phases(config: SystemConfig) -> np.ndarray:
    """RIS-side geometric phases of the alignment sum, length N. The BS
    antenna spacing multiplies both sides of the alignment sum."""
    x, z = config.element_coords()
    scale = 2.0 * np.pi / config.wavelength * config.a
    return scale * (x * config.a_br() + z * config.b_br())


def den_bs_phases(config: SystemConfig) -> np.ndarray:
    """BS-side geometric phases of the alignment sum, length M. BS antenna m
    sits at grid coordinate (m, 0) and carries no phase shift."""
    m = np.arange(config.M)
    scale = 2.0 * np.pi / config.wavelength * config.a
    return scale * m * config.a_br()


def _pair_cos_sum(u: np.ndarray) -> float:
    # sum over q < n of cos(u_n - u_q) == (|sum_n e^{j u_n}|^2 - N) / 2
    s = np.exp(1j * u).sum()
    return 0.5 * (abs(s) ** 2 - u.size)


def _alignment_sum(v: np.ndarray, w: np.ndarray) -> float:
    # sum over (m, n) of cos(v_n - w_m) == Re{ sum e^{j v} * conj(sum e^{j w}) }
    return float(np.real(np.exp(1j * v).sum() * np.conj(np.exp(1j * w).sum())))


def lambda_mn(config: SystemConfig, theta: PhaseProfile, k: int, mode: str | None = None) -> float:
    """Phase-noise-weighted coupling factor of user k under the given mode.

    Equals M*N minus 2*chi times the ratio of the RIS pairwise coherence sum
    (phase differences plus user-geometry offsets, strictly ordered pairs) to
    the BS/RIS alignment sum (all M*N index pairs, BS side unphased).
    """
    _check_user(config, k)
    if mode is None:
        mode = config.modes[k]
    ang = theta.angles()[mode_index(mode)]
    if ang.size != config.N:
        raise ValueError(f"phase profile has {ang.size} elements, config has {config.N}")
    chi = concentration_factor(config.eps_phase)
    numerator = _pair_cos_sum(ang + user_pair_phases(config, k))
    denominator = _alignment_sum(ang + den_ris_phases(config), den_bs_phases(config))
    if abs(denominator) < DENOMINATOR_FLOOR:
        raise DegenerateDenominatorError(
            f"alignment sum {denominator:.3e} below {DENOMINATOR_FLOOR:.0e} for user {k}"
        )
    return float(config.M * config.N - 2.0 * chi * numerator / denominator)


def expected_direct(config: SystemConfig, k: int) -> complex:
    """Closed-form expected direct entry of user k (statistical NLoS sum = 0)."""
    _check_user(config, k)
    beta = config.beta_bk[k]
    num = np.sqrt(config.alpha_bk[k]) * np.sqrt(beta) * lambda_m(config, k) + xi_m(config, k)
    return complex(num / np.sqrt(beta + 1.0))


def _cascade_prefactors(config: SystemConfig, k: int) -> tuple[float, float]:
    # (additive constant, coupling-factor weight) of the cascaded entry
    gain = np.sqrt(config.alpha_br * config.alpha_rk[k])
    b_br, b_rk = config.beta_br, config.beta_rk[k]
    denom = np.sqrt((b_br + 1.0) * (b_rk + 1.0))
    const = gain * (np.sqrt(b_br) + np.sqrt(b_rk) + 1.0) / denom
    weight = gain * np.sqrt(b_br) * np.sqrt(b_rk) / denom
    return float(const), float(weight)


def expected_cascaded(
    config: SystemConfig, theta: PhaseProfile, k: int, mode: str | None = None
) -> complex:
    """Closed-form expected cascaded entry of user k under the given mode."""
    const, weight = _cascade_prefactors(config, k)
    return complex(const + weight * lambda_mn(config, theta, k, mode))


def expected_effective_entry(config: SystemConfig, theta: PhaseProfile, k: int) -> complex:
    """Closed-form expected effective entry of user k under its assigned mode."""
    return expected_direct(config, k) + expected_cascaded(config, theta, k)


def closed_form_terms(config: SystemConfig, theta: PhaseProfile) -> ClosedFormTerms:
    """Evaluate all per-user closed-form ingredients at one phase profile."""
    lam_m = np.array([lambda_m(config, k) for k in range(config.K)])
    xi = np.array([xi_m(config, k) for k in range(config.K)], dtype=complex)
    lam_mn = np.array([lambda_mn(config, theta, k) for k in range(config.K)])
    return ClosedFormTerms(
        lambda_m=lam_m, xi_m=xi, lambda_mn=lam_mn,
        chi=concentration_factor(config.eps_phase),
    )


def monte_carlo_effective_entry(
    config: SystemConfig,
    theta: PhaseProfile,
    k: int,
    trials: int,
    rng: np.random.Generator,
    chunk: int = 2048,
) -> tuple[complex, np.ndarray]:
    """Monte Carlo estimate of the expected effective entry of user k.

    Per trial, draws fresh Rician channels and surface phase errors and forms
    the realized antenna sum of the direct row plus the cascaded row
    (RIS-user row times surface and error phases times the conjugate-transposed
    BS-RIS matrix). Returns the empirical mean and the standard errors of its
    real and imaginary parts.
    """
    _check_user(config, k)
    if trials < 100:
        raise ValueError(f"trials must be >= 100, got {trials}")
    M, N = config.M, config.N
    los_d = direct_los(config, k)
    los_g = bs_ris_los(config)
    los_r = ris_user_los(config, k)
    ang = theta.angles()[mode_index(config.modes[k])]
    surface = np.exp(1j * ang)
    params = VonMisesParams(mean=0.0, concentration=config.eps_phase)

    a_bk, b_bk = config.alpha_bk[k], config.beta_bk[k]
    a_rk, b_rk = config.alpha_rk[k], config.beta_rk[k]
    a_br, b_br = config.alpha_br, config.beta_br

    samples = np.empty(trials, dtype=complex)
    done = 0
    while done < trials:
        B = min(chunk, trials - done)
        h_d = np.sqrt(a_bk) * (
            np.sqrt(b_bk / (b_bk + 1.0)) * los_d
            + np.sqrt(1.0 / (b_bk + 1.0)) * _cn(rng, (B, M))
        )
        h_g = np.sqrt(a_br) * (
            np.sqrt(b_br / (b_br + 1.0)) * los_g
            + np.sqrt(1.0 / (b_br + 1.0)) * _cn(rng, (B, M, N))
        )
        h_r = np.sqrt(a_rk) * (
            np.sqrt(b_rk / (b_rk + 1.0)) * los_r
            + np.sqrt(1.0 / (b_rk + 1.0)) * _cn(rng, (B, N))
        )
        noise = sample_von_mises(params, rng, size=B * N).reshape(B, N)
        direct_sum = h_d.conj().sum(axis=1)
        colsum = h_g.sum(axis=1)  # (B, N) sums over BS antennas
        cascade = (h_r.conj() * surface * np.exp(1j * noise) * colsum.conj()).sum(axis=1)
        samples[done : done + B] = direct_sum + cascade
        done += B

    mean = complex(samples.mean())
    se = np.array([
        samples.real.std(ddof=1) / np.sqrt(trials),
        samples.imag.std(ddof=1) / np.sqrt(trials),
    ])
    return mean, se


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _check_user(config: SystemConfig, k: int) -> None:
    if not 0 <= k < config.K:
        raise IndexError(f"user index {k} out of range for K={config.K}")
