"""Circular statistics: modified Bessel functions I0/I1, the Von Mises
concentration factor, and a Von Mises sampler.

The concentration factor chi = I1(eps)/I0(eps) is the mean resultant length
of a Von Mises distribution with concentration eps; it quantifies how much
of a unit phasor survives averaging over the phase error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "VonMisesParams",
    "bessel_i",
    "concentration_factor",
    "sample_von_mises",
    "wrap_angle",
]

# Below this point the power series is used, above it the large-argument
# asymptotic expansion; both deliver < 1e-12 relative error at the boundary.
_SERIES_ASYMPTOTIC_SPLIT = 15.0


def wrap_angle(angle):
    """Reduce an angle (scalar or array) to the half-open interval (-pi, pi]."""
    return -(np.mod(-np.asarray(angle) + np.pi, 2.0 * np.pi) - np.pi)


@dataclass(frozen=True)
class VonMisesParams:
    """Mean direction (radians) and nonnegative concentration of a Von Mises law."""

    mean: float = 0.0
    concentration: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.concentration) or self.concentration < 0.0:
            raise ValueError(
                f"concentration must be finite and >= 0, got {self.concentration}"
            )
        object.__setattr__(self, "mean", float(wrap_angle(self.mean)))


def _series_i(order: int, x: float) -> float:
    # Power series sum_k (x/2)^(2k+order) / (k! (k+order)!); all terms are
    # positive, so float64 accumulation loses nothing to cancellation.
    half = 0.5 * x
    term = half if order == 1 else 1.0
    total = term
    k = 0
    while True:
        k += 1
        term *= half * half / (k * (k + order))
        total += term
        if term < 1e-17 * total or k > 600:
            return total


def _asymptotic_sum(order: int, x: float) -> float:
    # Scaled large-argument expansion: I_p(x) = e^x/sqrt(2 pi x) * S_p(x) with
    # S_p(x) = sum_k (-1)^k a_k(p)/x^k. Summed to the smallest term.
    mu = 4.0 * order * order
    term = 1.0
    total = 1.0
    k = 0
    while k < 200:
        k += 1
        nxt = term * ((2.0 * k - 1.0) ** 2 - mu) / (8.0 * x * k)
        if abs(nxt) >= abs(term):
            break
        term = nxt
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    return total


def bessel_i(order: int, x: float) -> float:
    """Modified Bessel function of the first kind, I_0 or I_1, for x >= 0.

    Relative error is below 1e-12 on x in [0, 700]. Uses the power series
    for x <= 15 and the large-argument asymptotic expansion above.
    """
    if order not in (0, 1):
        raise ValueError(f"order must be 0 or 1, got {order}")
    x = float(x)
    if not np.isfinite(x) or x < 0.0:
        raise ValueError(f"x must be finite and >= 0, got {x}")
    if x <= _SERIES_ASYMPTOTIC_SPLIT:
        return _series_i(order, x)
    return np.exp(x) / np.sqrt(2.0 * np.pi * x) * _asymptotic_sum(order, x)


def concentration_factor(epsilon: float) -> float:
    """Mean resultant length chi = I1(epsilon)/I0(epsilon) of a Von Mises law.

    Monotone nondecreasing, 0 at epsilon = 0, approaching 1 as epsilon grows.
    Evaluated without forming e^epsilon, so arbitrarily large epsilon is fine.
    """
    epsilon = float(epsilon)
    if not np.isfinite(epsilon) or epsilon < 0.0:
        raise ValueError(f"epsilon must be finite and >= 0, got {epsilon}")
    if epsilon == 0.0:
        return 0.0
    if epsilon <= _SERIES_ASYMPTOTIC_SPLIT:
        return _series_i(1, epsilon) / _series_i(0, epsilon)
    # exponential prefactors cancel in the ratio of the scaled sums
    return _asymptotic_sum(1, epsilon) / _asymptotic_sum(0, epsilon)


# Concentrations at or below this behave as uniform to within float noise.
_UNIFORM_CUTOFF = 1e-9


def sample_von_mises(
    params: VonMisesParams,
    rng: np.random.Generator,
    size: int | None = None,
):
    """Draw Von Mises angles in (-pi, pi] by Best-Fisher rejection sampling.

    The envelope is a wrapped Cauchy. Returns a scalar when ``size`` is None,
    else an array of ``size`` draws. Deterministic for a seeded generator.
    """
    n = 1 if size is None else int(size)
    if n < 0:
        raise ValueError(f"size must be >= 0, got {size}")
    kappa = params.concentration
    if kappa <= _UNIFORM_CUTOFF:
        out = rng.uniform(-np.pi, np.pi, size=n)
        # uniform() is half-open on the wrong side; fold -pi onto pi
        out[out == -np.pi] = np.pi
        return float(out[0]) if size is None else out

    tau = 1.0 + np.sqrt(1.0 + 4.0 * kappa * kappa)
    rho = (tau - np.sqrt(2.0 * tau)) / (2.0 * kappa)
    r = (1.0 + rho * rho) / (2.0 * rho)

    out = np.empty(n)
    pending = np.arange(n)
    while pending.size:
        m = pending.size
        u1 = rng.random(m)
        u2 = rng.random(m)
        u3 = rng.random(m)
        z = np.cos(np.pi * u1)
        f = (1.0 + r * z) / (r + z)
        c = kappa * (r - f)
        accept = (c * (2.0 - c) - u2 > 0.0) | (np.log(c / u2) + 1.0 - c >= 0.0)
        angles = np.sign(u3 - 0.5) * np.arccos(np.clip(f, -1.0, 1.0))
        out[pending[accept]] = angles[accept]
        pending = pending[~accept]

    out = wrap_angle(params.mean + out)
    return float(out[0]) if size is None else out
