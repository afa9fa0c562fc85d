"""Interference cost over the surface phase profile and its gradients.

The cost is the sum over users of the squared magnitude of the closed-form
expected effective entry, each user evaluated under its own surface mode. All
per-user constants and geometric phase tables are precomputed once into an
``ObjectiveContext``; evaluations then cost O(K (M + N)).

Gradients come in two equivalent forms: the real per-mode phase gradient
(derivative with respect to the element phases, checked against central
finite differences) and its complex ambient lifting ``j p grad`` used by the
manifold solver, which is tangent to the circle manifold by construction.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import _accel, manifold
from .channel import MODES, PhaseProfile, SystemConfig
from .circular import concentration_factor
from .statcsi import (
    DegenerateDenominatorError,
    DENOMINATOR_FLOOR,
    _cascade_prefactors,
    den_bs_phases,
    den_ris_phases,
    expected_direct,
    user_pair_phases,
)

__all__ = [
    "ObjectiveContext",
    "build_context",
    "cost",
    "phase_gradient",
    "euclidean_gradient",
    "finite_difference_gradient",
    "optimize_phases",
]


@dataclass(frozen=True)
class ObjectiveContext:
    """Immutable precomputed tables for cost/gradient evaluation."""

    N: int
    chi: float
    mn: float
    kappa_den: np.ndarray          # (N,) RIS-side alignment phases
    sw: complex                    # BS-side alignment resultant
    # per mode: indices into users, then (U, N) offsets and (U,) constants
    mode_users: tuple
    mode_kappa: tuple
    mode_const: tuple
    mode_weight: tuple


def build_context(config: SystemConfig) -> ObjectiveContext:
    chi = concentration_factor(config.eps_phase)
    kappa_den = den_ris_phases(config)
    sw = complex(np.exp(1j * den_bs_phases(config)).sum())

    users, kappas, consts, weights = [], [], [], []
    for mode in MODES:
        idx = config.users_in_mode(mode)
        users.append(idx)
        kappas.append(
            np.stack([user_pair_phases(config, k) for k in idx])
            if idx.size else np.zeros((0, config.N))
        )
        const = np.empty(idx.size)
        weight = np.empty(idx.size)
        for j, k in enumerate(idx):
            c3, dbar = _cascade_prefactors(config, k)
            const[j] = expected_direct(config, k).real + c3
            weight[j] = dbar
        consts.append(const)
        weights.append(weight)
    return ObjectiveContext(
        N=config.N,
        chi=chi,
        mn=float(config.M * config.N),
        kappa_den=kappa_den,
        sw=sw,
        mode_users=tuple(users),
        mode_kappa=tuple(kappas),
        mode_const=tuple(consts),
        mode_weight=tuple(weights),
    )


def _check_den(den: float, mode: str) -> None:
    if abs(den) < DENOMINATOR_FLOOR:
        raise DegenerateDenominatorError(
            f"alignment sum {den:.3e} below {DENOMINATOR_FLOOR:.0e} in mode {mode}"
        )


def _mode_angles(ctx: ObjectiveContext, profile: PhaseProfile) -> np.ndarray:
    ang = profile.angles()
    if ang.shape[1] != ctx.N:
        raise ValueError(f"profile has {ang.shape[1]} elements, context has {ctx.N}")
    return ang


def cost(ctx: ObjectiveContext, profile: PhaseProfile) -> float:
    """Sum over users of the squared expected effective entry."""
    ang = _mode_angles(ctx, profile)
    total = 0.0
    for i, mode in enumerate(MODES):
        if not ctx.mode_users[i].size:
            continue
        f, den = _accel.mode_cost(
            ang[i], ctx.mode_kappa[i], ctx.mode_const[i], ctx.mode_weight[i],
            ctx.kappa_den, ctx.sw.real, ctx.sw.imag, ctx.chi, ctx.mn,
        )
        _check_den(den, mode)
        total += f
    return total


def phase_gradient(ctx: ObjectiveContext, profile: PhaseProfile) -> np.ndarray:
    """Gradient of the cost with respect to the element phases, shape (2, N)."""
    ang = _mode_angles(ctx, profile)
    grad = np.zeros_like(ang)
    for i, mode in enumerate(MODES):
        if not ctx.mode_users[i].size:
            continue
        _, den, g = _accel.mode_cost_grad(
            ang[i], ctx.mode_kappa[i], ctx.mode_const[i], ctx.mode_weight[i],
            ctx.kappa_den, ctx.sw.real, ctx.sw.imag, ctx.chi, ctx.mn,
        )
        _check_den(den, mode)
        grad[i] = g
    return grad


def euclidean_gradient(ctx: ObjectiveContext, profile: PhaseProfile) -> np.ndarray:
    """Complex ambient gradient, shape (2, N): the phase gradient lifted by
    ``j p`` so that its real pairing with any curve velocity on the circles
    reproduces the phase derivative. Tangent at ``profile`` by construction."""
    return 1j * profile.values * phase_gradient(ctx, profile)


def finite_difference_gradient(
    ctx: ObjectiveContext, profile: PhaseProfile, h: float = 1e-6
) -> np.ndarray:
    """Central-difference phase gradient, shape (2, N); the oracle for
    ``phase_gradient``."""
    if not 1e-8 <= h <= 1e-4:
        raise ValueError(f"h must lie in [1e-8, 1e-4], got {h}")
    ang = _mode_angles(ctx, profile).copy()
    grad = np.zeros_like(ang)
    for i in range(ang.shape[0]):
        if not ctx.mode_users[i].size:
            continue
        for n in range(ang.shape[1]):
            orig = ang[i, n]
            ang[i, n] = orig + h
            f_plus = cost(ctx, PhaseProfile(np.exp(1j * ang)))
            ang[i, n] = orig - h
            f_minus = cost(ctx, PhaseProfile(np.exp(1j * ang)))
            ang[i, n] = orig
            grad[i, n] = (f_plus - f_minus) / (2.0 * h)
    return grad


# --- stacked-vector adapters for the generic manifold solver ---------------

def stack_profile(profile: PhaseProfile) -> np.ndarray:
    return profile.values.reshape(-1).copy()

def unstack_profile(vec: np.ndarray, N: int) -> PhaseProfile:
    return PhaseProfile(vec.reshape(len(MODES), N))


def make_cost_fn(ctx: ObjectiveContext):
    def fn(p: np.ndarray) -> float:
        return cost(ctx, unstack_profile(p, ctx.N))
    return fn


def make_grad_fn(ctx: ObjectiveContext):
    def fn(p: np.ndarray) -> np.ndarray:
        return euclidean_gradient(ctx, unstack_profile(p, ctx.N)).reshape(-1)
    return fn


def optimize_phases(
    config: SystemConfig,
    p0: PhaseProfile | None = None,
    tol: float | None = None,
    max_iter: int | None = None,
    callback=None,
) -> tuple[PhaseProfile, manifold.SolverTrace]:
    """Minimize the interference cost by Riemannian conjugate gradient.

    Starts from the all-ones profile unless ``p0`` is given. Returns the
    optimized profile and the per-iteration trace.
    """
    ctx = build_context(config)
    if p0 is None:
        p0 = PhaseProfile.flat(config.N)
    point, trace = manifold.solve_rcg(
        make_cost_fn(ctx),
        make_grad_fn(ctx),
        stack_profile(p0),
        tol=config.tol if tol is None else tol,
        max_iter=config.max_iter if max_iter is None else max_iter,
        callback=callback,
    )
    return unstack_profile(point, config.N), trace
