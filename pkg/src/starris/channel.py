"""Scenario description and channel generation for a STAR-RIS downlink.

A base station with an M-antenna uniform linear array serves K single-antenna
users through a direct link and a cascade over an N-element STAR-RIS (uniform
planar array). Each user is served in exactly one surface mode, transmission
(``"tr"``) or reflection (``"re"``); the surface holds one phase profile per
mode. Small-scale fading is Rician; the surface phase shifts are impaired by
Von Mises phase errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circular import VonMisesParams, sample_von_mises, wrap_angle

__all__ = [
    "MODES",
    "SystemConfig",
    "ChannelSet",
    "PhaseNoiseRealization",
    "PhaseProfile",
    "default_config",
    "ula_steering",
    "upa_steering",
    "bs_departure_response",
    "bs_ris_los",
    "direct_los",
    "ris_user_los",
    "sample_rician",
    "sample_phase_noise",
]

SPEED_OF_LIGHT = 299_792_458.0

MODES = ("tr", "re")


def mode_index(mode: str) -> int:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return MODES.index(mode)


def _per_user(value, K: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(K, float(arr))
    if arr.shape != (K,):
        raise ValueError(f"{name} must be a scalar or length-{K} array, got shape {arr.shape}")
    return arr


@dataclass
class SystemConfig:
    """Full scenario: array sizes, geometry, fading statistics, noise, solver.

    Angles are radians, Rician factors and large-scale gains are linear,
    noise power is watts. Per-user quantities accept scalars and are
    broadcast to length K.
    """

    M: int = 8
    K: int = 4
    n_x: int = 8
    n_z: int = 8
    carrier_hz: float = 28e9
    bs_spacing: float | None = None   # defaults to wavelength/2
    ris_spacing: float | None = None  # defaults to wavelength/2

    # geometry: user azimuth at the BS, user azimuth/elevation at the RIS,
    # BS-RIS azimuth/elevation, BS departure angle toward the RIS
    phi_bk: np.ndarray | float = 0.0
    phi_rk: np.ndarray | float = 0.0
    psi_rk: np.ndarray | float = 0.5
    phi_br: float = 0.46
    psi_br: float = 0.35
    theta_bs: float = 0.35

    # fading statistics
    beta_bk: np.ndarray | float = 10.0
    beta_br: float = 10.0
    beta_rk: np.ndarray | float = 10.0
    alpha_bk: np.ndarray | float = 0.1
    alpha_br: float = 0.1
    alpha_rk: np.ndarray | float = 0.1

    # noise: sigma2 = PSD * bandwidth unless overridden
    noise_psd_dbm_hz: float = -174.0
    bandwidth_hz: float = 10e6
    sigma2_override: float | None = None

    # phase-noise concentration at the surface
    eps_phase: float = 10.0

    # per-user surface mode, "tr" or "re"
    modes: tuple = ("tr", "re", "tr", "re")

    # solver settings
    tol: float = 1e-3
    max_iter: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.M < 1 or self.K < 1 or self.n_x < 1 or self.n_z < 1:
            raise ValueError("M, K, n_x, n_z must all be >= 1")
        self.phi_bk = _per_user(self.phi_bk, self.K, "phi_bk")
        self.phi_rk = _per_user(self.phi_rk, self.K, "phi_rk")
        self.psi_rk = _per_user(self.psi_rk, self.K, "psi_rk")
        self.beta_bk = _per_user(self.beta_bk, self.K, "beta_bk")
        self.beta_rk = _per_user(self.beta_rk, self.K, "beta_rk")
        self.alpha_bk = _per_user(self.alpha_bk, self.K, "alpha_bk")
        self.alpha_rk = _per_user(self.alpha_rk, self.K, "alpha_rk")
        self.modes = tuple(self.modes)
        if len(self.modes) != self.K or any(m not in MODES for m in self.modes):
            raise ValueError(f"modes must assign each of the {self.K} users to one of {MODES}")
        for name in ("beta_bk", "beta_rk"):
            if np.any(getattr(self, name) < 0):
                raise ValueError(f"{name} must be >= 0")
        if self.beta_br < 0:
            raise ValueError("beta_br must be >= 0")
        for name in ("alpha_bk", "alpha_rk"):
            if np.any(getattr(self, name) <= 0):
                raise ValueError(f"{name} must be > 0")
        if self.alpha_br <= 0:
            raise ValueError("alpha_br must be > 0")
        if self.sigma2 <= 0:
            raise ValueError("noise power must be > 0")
        if self.eps_phase < 0:
            raise ValueError("eps_phase must be >= 0")
        if self.tol <= 0 or self.max_iter < 1:
            raise ValueError("tol must be > 0 and max_iter >= 1")

    @property
    def N(self) -> int:
        return self.n_x * self.n_z

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def a(self) -> float:
        """BS antenna spacing in meters."""
        return self.wavelength / 2.0 if self.bs_spacing is None else self.bs_spacing

    @property
    def d(self) -> float:
        """RIS element spacing in meters."""
        return self.wavelength / 2.0 if self.ris_spacing is None else self.ris_spacing

    @property
    def sigma2(self) -> float:
        if self.sigma2_override is not None:
            return self.sigma2_override
        psd_w = 10.0 ** ((self.noise_psd_dbm_hz - 30.0) / 10.0)
        return psd_w * self.bandwidth_hz

    def element_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer (x, z) grid coordinates of the N elements, row-major in x."""
        n = np.arange(self.N)
        return n // self.n_z, n % self.n_z

    # composite angles of the RIS-user links and of the BS-RIS link
    def a_rk(self) -> np.ndarray:
        return np.sin(self.phi_rk) * np.sin(self.psi_rk)

    def b_rk(self) -> np.ndarray:
        return np.cos(self.phi_rk) * np.sin(self.psi_rk)

    def a_br(self) -> float:
        return float(np.sin(self.phi_br) * np.sin(self.psi_br))

    def b_br(self) -> float:
        return float(np.cos(self.phi_br) * np.sin(self.psi_br))

    def users_in_mode(self, mode: str) -> np.ndarray:
        idx = [k for k in range(self.K) if self.modes[k] == mode]
        return np.asarray(idx, dtype=int)


def default_config(**overrides) -> SystemConfig:
    """Baseline scenario: M=8, K=4, N=64 (8x8), 28 GHz, 10 dB Rician factors,
    -10 dB large-scale gains, phase-noise concentration 10.

    Users alternate tr/re modes, sit at distinct BS azimuths, and users
    sharing a mode sit at neighboring RIS angles (a common served sector per
    surface side); the BS-RIS geometry is off-boresight. The resulting
    interference cost shows the canonical fast-converging descent from the
    all-ones profile.
    """
    K = int(overrides.pop("K", 4))
    spread = (2.0 * (np.arange(K) + 1.0) / (K + 1.0)) - 1.0  # in (-1, 1)
    modes = tuple(MODES[k % 2] for k in range(K))
    # neighboring RIS angles for users that share a mode
    sector = {"tr": (0.30, 0.80), "re": (-0.42, 0.62)}
    rank = {m: 0 for m in MODES}
    phi_rk = np.empty(K)
    psi_rk = np.empty(K)
    for k, m in enumerate(modes):
        phi_rk[k] = sector[m][0] + 0.03 * rank[m]
        psi_rk[k] = sector[m][1] + 0.03 * rank[m]
        rank[m] += 1
    defaults = dict(
        K=K,
        phi_bk=spread * 0.5 * (np.pi / 3.0),
        phi_rk=phi_rk,
        psi_rk=psi_rk,
        phi_br=1.39925,
        psi_br=0.63362,
        modes=modes,
    )
    defaults.update(overrides)
    return SystemConfig(**defaults)


@dataclass
class PhaseProfile:
    """Unit-modulus surface coefficients, one length-N vector per mode.

    ``values[i, n]`` is the coefficient of element n in mode MODES[i].
    """

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 2 or self.values.shape[0] != len(MODES):
            raise ValueError(f"values must have shape (2, N), got {self.values.shape}")
        if np.max(np.abs(np.abs(self.values) - 1.0)) > 1e-9:
            raise ValueError("phase profile entries must be unit modulus")

    @classmethod
    def flat(cls, N: int) -> "PhaseProfile":
        return cls(np.ones((len(MODES), N), dtype=complex))

    @classmethod
    def from_angles(cls, tr: np.ndarray, re: np.ndarray) -> "PhaseProfile":
        return cls(np.exp(1j * np.stack([np.asarray(tr, float), np.asarray(re, float)])))

    @property
    def N(self) -> int:
        return self.values.shape[1]

    def angles(self) -> np.ndarray:
        """Per-mode element phases in (-pi, pi], shape (2, N)."""
        return wrap_angle(np.angle(self.values))

    def get(self, mode: str) -> np.ndarray:
        return self.values[mode_index(mode)]


@dataclass
class PhaseNoiseRealization:
    """One draw of the surface phase errors, shape (2, N), angles in (-pi, pi]."""

    angles: np.ndarray

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float)
        if self.angles.ndim != 2 or self.angles.shape[0] != len(MODES):
            raise ValueError(f"angles must have shape (2, N), got {self.angles.shape}")

    def get(self, mode: str) -> np.ndarray:
        return self.angles[mode_index(mode)]


@dataclass
class ChannelSet:
    """One realization of all links, plus the LoS components used to build it.

    direct: (K, M) BS-to-user vectors; bs_ris: (M, N); ris_user: (K, N).
    """

    direct: np.ndarray
    bs_ris: np.ndarray
    ris_user: np.ndarray
    los_direct: np.ndarray
    los_bs_ris: np.ndarray
    los_ris_user: np.ndarray


def ula_steering(M: int, a: float, wavelength: float, phi: float) -> np.ndarray:
    """Uniform-linear-array response: element m carries phase 2 pi a m sin(phi)/wavelength."""
    if M < 1 or a <= 0 or wavelength <= 0:
        raise ValueError("M >= 1, a > 0 and wavelength > 0 required")
    m = np.arange(M)
    return np.exp(1j * (2.0 * np.pi / wavelength) * a * m * np.sin(phi))


def upa_steering(config: SystemConfig, A: float, B: float) -> np.ndarray:
    """Planar-array response over the RIS grid for composite angles (A, B):
    element n carries phase 2 pi d (x_n A + z_n B) / wavelength."""
    x, z = config.element_coords()
    phase = (2.0 * np.pi / config.wavelength) * config.d * (x * A + z * B)
    return np.exp(1j * phase)


def direct_los(config: SystemConfig, k: int) -> np.ndarray:
    """LoS component of the BS-to-user-k link."""
    return ula_steering(config.M, config.a, config.wavelength, config.phi_bk[k])


def ris_user_los(config: SystemConfig, k: int) -> np.ndarray:
    """LoS component of the RIS-to-user-k link (keyed on the user's own angles,
    identical for both surface modes)."""
    A = np.sin(config.phi_rk[k]) * np.sin(config.psi_rk[k])
    B = np.cos(config.phi_rk[k]) * np.sin(config.psi_rk[k])
    return upa_steering(config, A, B)


def bs_departure_response(config: SystemConfig) -> np.ndarray:
    """BS array response along the departure angle toward the RIS: antenna m
    carries phase 2 pi a m cos(theta_bs)/wavelength."""
    m = np.arange(config.M)
    return np.exp(
        1j * (2.0 * np.pi / config.wavelength) * config.a * m * np.cos(config.theta_bs)
    )


def bs_ris_los(config: SystemConfig) -> np.ndarray:
    """Rank-1 LoS component of the BS-to-RIS link, shape (M, N).

    Entry (m, n) is the product of the BS departure response at antenna m
    and the RIS arrival response at element n (UPA with composite angles
    sin(phi_br)cos(psi_br) and cos(phi_br))."""
    A = np.sin(config.phi_br) * np.cos(config.psi_br)
    B = np.cos(config.phi_br)
    return np.outer(bs_departure_response(config), upa_steering(config, A, B))


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    # circularly symmetric, zero mean, unit variance per entry
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _rician_mix(los: np.ndarray, nlos: np.ndarray, beta: float, alpha: float) -> np.ndarray:
    return np.sqrt(alpha) * (
        np.sqrt(beta / (beta + 1.0)) * los + np.sqrt(1.0 / (beta + 1.0)) * nlos
    )


def sample_rician(config: SystemConfig, rng: np.random.Generator) -> ChannelSet:
    """Draw one Rician realization of every link.

    Each channel is sqrt(alpha) (sqrt(beta/(beta+1)) LoS + sqrt(1/(beta+1)) NLoS)
    with i.i.d. unit-variance circularly symmetric Gaussian NLoS entries.
    """
    M, K, N = config.M, config.K, config.N
    los_d = np.stack([direct_los(config, k) for k in range(K)])
    los_g = bs_ris_los(config)
    los_r = np.stack([ris_user_los(config, k) for k in range(K)])

    direct = np.empty((K, M), dtype=complex)
    for k in range(K):
        direct[k] = _rician_mix(
            los_d[k], _complex_normal(rng, M), config.beta_bk[k], config.alpha_bk[k]
        )
    bs_ris = _rician_mix(los_g, _complex_normal(rng, (M, N)), config.beta_br, config.alpha_br)
    ris_user = np.empty((K, N), dtype=complex)
    for k in range(K):
        ris_user[k] = _rician_mix(
            los_r[k], _complex_normal(rng, N), config.beta_rk[k], config.alpha_rk[k]
        )
    return ChannelSet(
        direct=direct,
        bs_ris=bs_ris,
        ris_user=ris_user,
        los_direct=los_d,
        los_bs_ris=los_g,
        los_ris_user=los_r,
    )


def sample_phase_noise(config: SystemConfig, rng: np.random.Generator) -> PhaseNoiseRealization:
    """Draw the 2N independent zero-mean Von Mises phase errors, one N-vector
    per surface mode."""
    params = VonMisesParams(mean=0.0, concentration=config.eps_phase)
    draws = sample_von_mises(params, rng, size=2 * config.N)
    return PhaseNoiseRealization(draws.reshape(2, config.N))
