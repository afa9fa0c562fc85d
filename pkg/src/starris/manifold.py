"""Riemannian conjugate gradient on a product of complex circles.

Points are complex vectors with unit-modulus entries; tangent vectors at p
are complex vectors t with Re(t conj(p)) = 0 elementwise. The metric is the
real part of the Euclidean inner product. Retraction renormalizes each entry;
vector transport projects onto the destination tangent space. Directions mix
the new negative gradient with the transported previous direction through a
nonnegatively clamped Polak-Ribiere parameter, with a reset to steepest
descent whenever conjugacy fails to produce a descent direction.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RetractionError",
    "SolverTrace",
    "project_to_tangent",
    "riemannian_gradient",
    "transport",
    "pr_beta",
    "conjugate_direction",
    "retract",
    "armijo_step",
    "solve_rcg",
    "unit_modulus_error",
    "tangency_error",
]

RETRACTION_FLOOR = 1e-14


class RetractionError(RuntimeError):
    """A retracted entry landed numerically at the origin (antipodal step)."""


def real_inner(a: np.ndarray, b: np.ndarray) -> float:
    """Riemannian metric: the real part of the Euclidean inner product."""
    return float(np.real(np.vdot(a, b)))


def unit_modulus_error(p: np.ndarray) -> float:
    return float(np.max(np.abs(np.abs(p) - 1.0)))


def tangency_error(p: np.ndarray, t: np.ndarray) -> float:
    return float(np.max(np.abs(np.real(t * np.conj(p)))))


def project_to_tangent(p: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Remove the radial component of v at p: v - Re(v conj(p)) p."""
    return v - np.real(v * np.conj(p)) * p


def riemannian_gradient(p: np.ndarray, euclid_grad: np.ndarray) -> np.ndarray:
    """Tangent-space projection of the ambient gradient."""
    return project_to_tangent(p, euclid_grad)


def transport(p_from: np.ndarray, p_to: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Move a tangent vector between tangent spaces by projection at the
    destination."""
    return project_to_tangent(p_to, t)


def pr_beta(
    grad_new: np.ndarray, grad_old: np.ndarray, grad_old_transported: np.ndarray
) -> float:
    """Nonnegatively clamped Polak-Ribiere parameter: the transported old
    gradient is subtracted from the new one so both live in the same tangent
    space, and negative values restart the recursion at steepest descent."""
    denom = real_inner(grad_old, grad_old)
    if denom <= 0.0:
        raise ZeroDivisionError("pr_beta requires a nonzero previous gradient")
    raw = real_inner(grad_new - grad_old_transported, grad_new) / denom
    return max(0.0, raw)


def conjugate_direction(
    grad_new: np.ndarray, beta: float, dir_old_transported: np.ndarray | None = None
) -> np.ndarray:
    """New search direction: -grad + beta * transported previous direction."""
    if dir_old_transported is None:
        return -grad_new
    return -grad_new + beta * dir_old_transported


def retract(p: np.ndarray, direction: np.ndarray, step: float) -> np.ndarray:
    """Step along the tangent direction and renormalize each entry."""
    if step < 0.0:
        raise ValueError(f"step must be >= 0, got {step}")
    moved = p + step * direction
    mag = np.abs(moved)
    if np.min(mag) < RETRACTION_FLOOR:
        raise RetractionError(
            f"retraction magnitude {np.min(mag):.3e} below {RETRACTION_FLOOR:.0e}"
        )
    return moved / mag


def armijo_step(
    cost_fn,
    p: np.ndarray,
    direction: np.ndarray,
    grad: np.ndarray,
    f0: float | None = None,
    delta0: float = 1.0,
    rho: float = 0.5,
    c: float = 1e-4,
    max_backtracks: int = 50,
) -> float | None:
    """Largest step delta0 * rho^m satisfying the sufficient-decrease rule
    f(retract(p, d, delta)) <= f(p) + c delta <grad, d>. Returns None when no
    step qualifies within ``max_backtracks`` halvings or the direction does
    not descend."""
    if f0 is None:
        f0 = cost_fn(p)
    slope = real_inner(grad, direction)
    if slope >= 0.0:
        return None
    delta = delta0
    for _ in range(max_backtracks + 1):
        if cost_fn(retract(p, direction, delta)) <= f0 + c * delta * slope:
            return delta
        delta *= rho
    return None


@dataclass
class SolverTrace:
    """Per-iteration record of a solver run. Index 0 of ``objective`` and
    ``grad_norm`` is the initial point; ``step``, ``beta`` and ``iter_time_s``
    hold one entry per accepted iteration."""

    objective: list = field(default_factory=list)
    grad_norm: list = field(default_factory=list)
    step: list = field(default_factory=list)
    beta: list = field(default_factory=list)
    iter_time_s: list = field(default_factory=list)
    iterations: int = 0
    wall_time_s: float = 0.0
    converged: bool = False


def solve_rcg(
    cost_fn,
    grad_fn,
    p0: np.ndarray,
    tol: float,
    max_iter: int,
    callback=None,
) -> tuple[np.ndarray, SolverTrace]:
    """Minimize cost_fn over the product of complex circles.

    Iterates: ambient gradient, tangent projection, Polak-Ribiere direction
    with transport, Armijo backtracking, renormalizing retraction. Stops when
    the Riemannian gradient norm falls below ``tol`` or after ``max_iter``
    iterations. ``callback(p, riem_grad, direction)`` runs after every
    accepted iteration.
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be > 0, got {tol}")
    p = np.asarray(p0, dtype=complex)
    if unit_modulus_error(p) > 1e-9:
        raise ValueError("p0 is not unit modulus")
    p = p / np.abs(p)

    t_start = time.perf_counter()
    f = cost_fn(p)
    rg = project_to_tangent(p, grad_fn(p))
    gnorm = float(np.linalg.norm(rg))
    trace = SolverTrace(objective=[f], grad_norm=[gnorm])
    direction = -rg
    prev_arc = None

    t = 0
    while gnorm >= tol and t < max_iter:
        tic = time.perf_counter()
        steepest = np.array_equal(direction, -rg)
        if real_inner(direction, rg) >= 0.0 and not steepest:
            direction = -rg
            steepest = True
        dir_norm = max(float(np.linalg.norm(direction)), 1e-300)
        # warm-started trial: unit arc length on the first iteration, then a
        # multiple of the last accepted arc length
        arc = 1.0 if prev_arc is None else 4.0 * prev_arc
        step = armijo_step(cost_fn, p, direction, rg, f0=f, delta0=arc / dir_norm)
        if step is None and not steepest:
            direction = -rg
            dir_norm = gnorm
            step = armijo_step(cost_fn, p, direction, rg, f0=f, delta0=arc / dir_norm)
        if step is None:
            break  # no admissible decrease left along steepest descent
        # descend the backtracking ladder while it strictly improves: the
        # largest admissible step can overshoot the line minimum badly
        f_acc = cost_fn(retract(p, direction, step))
        for _ in range(10):
            f_half = cost_fn(retract(p, direction, 0.5 * step))
            if f_half < f_acc:
                step *= 0.5
                f_acc = f_half
            else:
                break

        p_new = retract(p, direction, step)
        f_new = cost_fn(p_new)
        rg_new = project_to_tangent(p_new, grad_fn(p_new))
        beta = pr_beta(rg_new, rg, transport(p, p_new, rg))
        direction = conjugate_direction(rg_new, beta, transport(p, p_new, direction))

        prev_arc = step * dir_norm
        p, f, rg = p_new, f_new, rg_new
        gnorm = float(np.linalg.norm(rg))
        t += 1
        trace.objective.append(f)
        trace.grad_norm.append(gnorm)
        trace.step.append(step)
        trace.beta.append(beta)
        trace.iter_time_s.append(time.perf_counter() - tic)
        if callback is not None:
            callback(p, rg, direction)

    trace.iterations = t
    trace.converged = gnorm < tol
    trace.wall_time_s = time.perf_counter() - t_start
    return p, trace
