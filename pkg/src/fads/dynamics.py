"""Exact-in-distribution market paths and the informed investor's view.

Arrays carry time on the last axis, so the same functions handle a single
path (shape ``(n + 1,)``) or a block of paths (shape ``(m, n + 1)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .model import ModelParams, TimeGrid


def ou_transition(lam: float, dt: float) -> tuple[float, float]:
    """Decay factor and conditional variance of one exact O-U step."""
    decay = math.exp(-lam * dt)
    var = -math.expm1(-2.0 * lam * dt) / (2.0 * lam)
    return decay, var


def _normals(noise, shape) -> np.ndarray:
    if isinstance(noise, np.random.Generator):
        return noise.standard_normal(shape)
    z = np.asarray(noise, dtype=float)
    if z.shape[-len(shape):] != shape:
        raise ValueError(f"noise has shape {z.shape}, expected trailing {shape}")
    return z


def simulate_ou(grid: TimeGrid, lam: float, noise) -> tuple[np.ndarray, np.ndarray]:
    """Mean-reverting fads process ``dU = -lam U dt + dB`` with ``U_0 = 0``.

    Parameters
    ----------
    grid : TimeGrid
    lam : float
        Mean-reversion speed, > 0.
    noise : Generator or array
        Either a generator or standard normals with trailing shape
        ``(n_steps,)``; one normal drives each transition.

    Returns
    -------
    u, b : arrays with trailing shape ``(n_steps + 1,)``
        ``u`` is sampled from the exact transition density. ``b`` is the
        driving Brownian motion reconstructed as ``dB = dU + lam U_k dt``.
    """
    if lam <= 0:
        raise ValueError("lambda must be strictly positive")
    xi = _normals(noise, (grid.n_steps,))
    decay, var = ou_transition(lam, grid.dt)
    u = np.zeros(xi.shape[:-1] + (grid.n_steps + 1,))
    u[..., 1:] = lfilter([math.sqrt(var)], [1.0, -decay], xi, axis=-1)
    du = np.diff(u, axis=-1)
    b = np.zeros_like(u)
    np.cumsum(du + lam * u[..., :-1] * grid.dt, axis=-1, out=b[..., 1:])
    return u, b


@dataclass(frozen=True)
class MarketPath:
    grid: TimeGrid
    w: np.ndarray
    b: np.ndarray
    u: np.ndarray
    y: np.ndarray
    s: np.ndarray

    @property
    def n_paths(self) -> int:
        return 1 if self.y.ndim == 1 else self.y.shape[0]

    def path(self, k: int) -> "MarketPath":
        """Single path ``k`` out of a block."""
        if self.y.ndim == 1:
            if k != 0:
                raise IndexError(k)
            return self
        return MarketPath(self.grid, self.w[k], self.b[k], self.u[k], self.y[k], self.s[k])


def market_from_normals(params: ModelParams, grid: TimeGrid, z: np.ndarray) -> MarketPath:
    """Build a market path from standard normals of trailing shape ``(n_steps, 2)``.

    Column 0 drives the permanent shock W, column 1 the fads innovation.
    """
    z = _normals(z, (grid.n_steps, 2))
    dt = grid.dt
    u, b = simulate_ou(grid, params.lam, z[..., 1])
    dw = math.sqrt(dt) * z[..., 0]
    w = np.zeros_like(u)
    np.cumsum(dw, axis=-1, out=w[..., 1:])

    dy = params.p * dw + params.q * np.diff(u, axis=-1)
    y = np.zeros_like(u)
    np.cumsum(dy, axis=-1, out=y[..., 1:])

    t = grid.times[:-1]
    mu_k, sig_k = params.mu(t), params.sigma(t)
    dlog = (mu_k - 0.5 * sig_k**2) * dt + sig_k * dy
    log_s = np.zeros_like(u)
    np.cumsum(dlog, axis=-1, out=log_s[..., 1:])
    s = params.s0 * np.exp(log_s)
    return MarketPath(grid, w, b, u, y, s)


def simulate_market(params: ModelParams, grid: TimeGrid, rng: np.random.Generator) -> MarketPath:
    """One market path drawn from ``rng``."""
    return market_from_normals(params, grid, rng.standard_normal((grid.n_steps, 2)))


@dataclass(frozen=True)
class InformedView:
    """Informed investor's Brownian motion, drift adjustment and drift."""

    b1: np.ndarray
    upsilon1: np.ndarray
    mu1: np.ndarray


def informed_view(path: MarketPath, params: ModelParams, grid: TimeGrid | None = None) -> InformedView:
    if grid is not None and grid != path.grid:
        raise ValueError("grid mismatch between path and request")
    t = path.grid.times
    b1 = params.p * path.w + params.q * path.b
    upsilon1 = -params.lam * params.q * path.u
    mu1 = params.mu(t) + upsilon1 * params.sigma(t)
    return InformedView(b1, upsilon1, mu1)
