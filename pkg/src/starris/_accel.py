"""Backend selection for the hot per-iteration kernels.

The solver evaluates, per surface mode, the interference cost and its phase
gradient many times per iteration (line search included). Both a numba
``@njit`` implementation and a pure-numpy implementation are provided; they
compute identical formulas. The numba path is used when numba imports and the
environment variable ``STARRIS_DISABLE_NUMBA`` is unset (or "0"); setting it
to anything else forces the numpy path. Choose the backend before importing
the package.

Kernel contract (one surface mode, U users assigned to it):
    theta        (N,)   element phases
    kappa_users  (U, N) per-user geometric offsets of the pairwise sum
    const_users  (U,)   additive constant of each user's expected entry
    weight_users (U,)   coupling-factor weight of each user's expected entry
    kappa_den    (N,)   RIS-side geometric offsets of the alignment sum
    sw_re, sw_im        BS-side resultant of the alignment sum
    chi                 phase-noise coherence in [0, 1)
    mn                  M*N offset of the coupling factor
returns (cost, alignment denominator[, gradient (N,)]).
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "BACKEND",
    "NUMBA_AVAILABLE",
    "mode_cost",
    "mode_cost_grad",
    "mode_cost_numpy",
    "mode_cost_grad_numpy",
    "mode_cost_numba",
    "mode_cost_grad_numba",
    "warmup",
]


def mode_cost_numpy(theta, kappa_users, const_users, weight_users,
                    kappa_den, sw_re, sw_im, chi, mn):
    n = theta.size
    v = theta + kappa_den
    sv = np.exp(1j * v).sum()
    den = sv.real * sw_re + sv.imag * sw_im
    su = np.exp(1j * (theta[None, :] + kappa_users)).sum(axis=1)
    num = 0.5 * (np.abs(su) ** 2 - n)
    lam = mn - 2.0 * chi * num / den
    e = const_users + weight_users * lam
    return float(np.dot(e, e)), float(den)


def mode_cost_grad_numpy(theta, kappa_users, const_users, weight_users,
                         kappa_den, sw_re, sw_im, chi, mn):
    n = theta.size
    v = theta + kappa_den
    ev = np.exp(1j * v)
    sv = ev.sum()
    den = sv.real * sw_re + sv.imag * sw_im
    dden = -(np.sin(v) * sw_re - np.cos(v) * sw_im)

    u = theta[None, :] + kappa_users
    eu = np.exp(1j * u)
    su = eu.sum(axis=1)
    num = 0.5 * (np.abs(su) ** 2 - n)
    # d/d theta_n of the pairwise sum: -Im{ e^{j u_n} conj(S_u) }
    dnum = -(np.sin(u) * su.real[:, None] - np.cos(u) * su.imag[:, None])

    lam = mn - 2.0 * chi * num / den
    e = const_users + weight_users * lam
    dlam = -2.0 * chi * (den * dnum - num[:, None] * dden[None, :]) / (den * den)
    grad = (2.0 * e * weight_users) @ dlam
    return float(np.dot(e, e)), float(den), grad


def _kernels_numba():
    from numba import njit

    @njit(cache=True)
    def _mode_cost(theta, kappa_users, const_users, weight_users,
                   kappa_den, sw_re, sw_im, chi, mn):
        n = theta.shape[0]
        nu = kappa_users.shape[0]
        sv_re = 0.0
        sv_im = 0.0
        for i in range(n):
            v = theta[i] + kappa_den[i]
            sv_re += np.cos(v)
            sv_im += np.sin(v)
        den = sv_re * sw_re + sv_im * sw_im
        f = 0.0
        for u in range(nu):
            s_re = 0.0
            s_im = 0.0
            for i in range(n):
                p = theta[i] + kappa_users[u, i]
                s_re += np.cos(p)
                s_im += np.sin(p)
            num = 0.5 * (s_re * s_re + s_im * s_im - n)
            lam = mn - 2.0 * chi * num / den
            e = const_users[u] + weight_users[u] * lam
            f += e * e
        return f, den

    @njit(cache=True)
    def _mode_cost_grad(theta, kappa_users, const_users, weight_users,
                        kappa_den, sw_re, sw_im, chi, mn):
        n = theta.shape[0]
        nu = kappa_users.shape[0]
        sv_re = 0.0
        sv_im = 0.0
        for i in range(n):
            v = theta[i] + kappa_den[i]
            sv_re += np.cos(v)
            sv_im += np.sin(v)
        den = sv_re * sw_re + sv_im * sw_im
        dden = np.empty(n)
        for i in range(n):
            v = theta[i] + kappa_den[i]
            dden[i] = -(np.sin(v) * sw_re - np.cos(v) * sw_im)

        f = 0.0
        grad = np.zeros(n)
        den2 = den * den
        for u in range(nu):
            s_re = 0.0
            s_im = 0.0
            for i in range(n):
                p = theta[i] + kappa_users[u, i]
                s_re += np.cos(p)
                s_im += np.sin(p)
            num = 0.5 * (s_re * s_re + s_im * s_im - n)
            lam = mn - 2.0 * chi * num / den
            e = const_users[u] + weight_users[u] * lam
            f += e * e
            scale = 2.0 * e * weight_users[u]
            for i in range(n):
                p = theta[i] + kappa_users[u, i]
                dnum = -(np.sin(p) * s_re - np.cos(p) * s_im)
                dlam = -2.0 * chi * (den * dnum - num * dden[i]) / den2
                grad[i] += scale * dlam
        return f, den, grad

    return _mode_cost, _mode_cost_grad


NUMBA_AVAILABLE = False
mode_cost_numba = None
mode_cost_grad_numba = None
try:
    mode_cost_numba, mode_cost_grad_numba = _kernels_numba()
    NUMBA_AVAILABLE = True
except ImportError:
    pass

_disabled = os.environ.get("STARRIS_DISABLE_NUMBA", "0") not in ("", "0")
if NUMBA_AVAILABLE and not _disabled:
    BACKEND = "numba"
    mode_cost = mode_cost_numba
    mode_cost_grad = mode_cost_grad_numba
else:
    BACKEND = "numpy"
    mode_cost = mode_cost_numpy
    mode_cost_grad = mode_cost_grad_numpy


def warmup() -> None:
    """Trigger JIT compilation of the active kernels on tiny inputs."""
    theta = np.zeros(2)
    kap = np.zeros((1, 2))
    ones = np.ones(1)
    mode_cost(theta, kap, ones, ones, theta, 1.0, 0.0, 0.5, 2.0)
    mode_cost_grad(theta, kap, ones, ones, theta, 1.0, 0.0, 0.5, 2.0)
