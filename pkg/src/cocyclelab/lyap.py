"""Lyapunov exponent estimators and the rotation-twist average identity.

The orbit estimator is the standard two-vector Benettin scheme: a tracked
unit vector (renormalized every step, log-growth accumulated) plus an
orthogonalized second vector that also exposes the contracting exponent.
Quadrature follows unique ergodicity: uniform grids for d = 1, a single
ergodic orbit as quasi-Monte Carlo nodes for d >= 2.
"""

from dataclasses import dataclass

import numpy as np

from . import algebra as alg
from .cocycle import Cocycle, _as_points

_CHUNK = 8192


@dataclass
class LyapEstimate:
    """Top Lyapunov exponent in nats/iterate with a halving error proxy."""

    value: float
    n: int
    error_proxy: float
    second: float = 0.0  # contracting-exponent estimate from vector two


def _orbit_accumulate(step_iter, n):
    """Run the two-vector scheme over per-step (T,2,2) matrix batches."""
    first = next(step_iter)
    t = first.shape[0]
    v1 = np.tile(np.array([1.0, 0.0], dtype=complex), (t, 1))
    v2 = np.tile(np.array([0.0, 1.0], dtype=complex), (t, 1))
    s1 = np.zeros(t)
    s2 = np.zeros(t)
    s1_half = None
    k = 0
    batch = first
    while True:
        w1 = np.einsum("tij,tj->ti", batch, v1)
        w2 = np.einsum("tij,tj->ti", batch, v2)
        g1 = np.sqrt(np.sum(np.abs(w1) ** 2, axis=1))
        v1 = w1 / g1[:, None]
        # Gram-Schmidt; restart the second vector on angle collapse
        proj = np.sum(np.conj(v1) * w2, axis=1)
        w2 = w2 - proj[:, None] * v1
        g2 = np.sqrt(np.sum(np.abs(w2) ** 2, axis=1))
        collapsed = g2 < 1e-8 * np.abs(proj)
        if np.any(collapsed):
            w2 = np.where(
                collapsed[:, None], np.stack([-v1[:, 1], v1[:, 0]], axis=1), w2
            )
            g2 = np.where(collapsed, 1.0, g2)
        v2 = w2 / g2[:, None]
        s1 += np.log(g1)
        s2 += np.log(g2)
        k += 1
        if s1_half is None and k >= n // 2:
            s1_half = s1.copy()
        if k >= n:
            break
        batch = next(step_iter)
    value = s1 / n
    half = s1_half / (n // 2)
    return value, np.abs(value - half), s2 / n


def _cocycle_steps(cocycle, x0, n):
    x0 = _as_points(x0, cocycle.dim)
    if x0.ndim == 1:
        x0 = x0[None, :]
    ks = 0
    while ks < n:
        kk = np.arange(ks, min(ks + _CHUNK, n))
        pts = x0[:, None, :] + kk[None, :, None] * cocycle.alpha
        t, c = pts.shape[0], pts.shape[1]
        mats = cocycle.eval(pts.reshape(t * c, -1)).reshape(t, c, 2, 2)
        for j in range(c):
            yield mats[:, j]
        ks += c


def lyapunov_orbit(cocycle, x0=None, n=100000):
    """Single-orbit Birkhoff estimate of the top exponent at base point x0."""
    if x0 is None:
        x0 = np.full(cocycle.dim, np.sqrt(0.5) / 3)
    value, proxy, second = _orbit_accumulate(
        _cocycle_steps(cocycle, x0, n), n
    )
    return LyapEstimate(
        value=float(value[0]),
        n=int(n),
        error_proxy=float(proxy[0]),
        second=float(second[0]),
    )


def quadrature_points(dim, size, alpha=None, x0=None):
    """Uniform grid for d = 1; ergodic-orbit QMC nodes for d >= 2."""
    if dim == 1:
        return np.linspace(0.0, 1.0, size, endpoint=False)[:, None]
    if alpha is None:
        raise ValueError("multidimensional quadrature needs alpha")
    x0 = np.full(dim, np.sqrt(0.5) / 3) if x0 is None else x0
    k = np.arange(size)[:, None]
    return np.mod(x0[None, :] + k * np.asarray(alpha)[None, :], 1.0)


def lyapunov_upper(cocycle, n, grid=256):
    """(1/n) mean of ln ||A_n(x)||: an upper bound up to quadrature error."""
    pts = (
        grid
        if isinstance(grid, np.ndarray)
        else quadrature_points(cocycle.dim, grid, cocycle.alpha)
    )
    sm = cocycle.iterate(pts, n)
    return float(np.mean(sm.log_norm()) / n)


def herman_average_rhs(cocycle, grid=4096):
    """Grid mean of ln((||A|| + ||A||^-1)/2), spectral norm."""
    pts = (
        grid
        if isinstance(grid, np.ndarray)
        else quadrature_points(cocycle.dim, grid, cocycle.alpha)
    )
    s = alg.spectral_norm(cocycle.eval(pts))
    return float(np.mean(np.log((s + 1.0 / s) / 2.0)))


def lyapunov_theta_average(cocycle, theta_points=64, n=100000, x0=None):
    """Mean over theta of L(R_theta A); pairs with herman_average_rhs."""
    thetas = (
        theta_points
        if isinstance(theta_points, np.ndarray)
        else (np.arange(theta_points) + 0.5) / theta_points
    )
    rots = alg.rot(thetas).astype(complex)
    if x0 is None:
        x0 = np.full(cocycle.dim, np.sqrt(0.5) / 3)

    def steps():
        for base in _cocycle_steps(cocycle, x0, n):
            yield rots @ base[0]

    value, proxy, _ = _orbit_accumulate(steps(), n)
    return float(np.mean(value)), float(np.mean(proxy))
