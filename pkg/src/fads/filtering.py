"""Uninformed investor: innovation Brownian motion and drift adjustment.

The uninformed investor sees the stock price only, equivalently the driver
``Y``. Writing ``dY = upsilon0 dt + dB0`` with ``B0`` a Brownian motion in the
observation filtration, the drift adjustment is the exponential-kernel
integral

    upsilon0_t = -lam * int_0^t exp(-lam (t - s)) (1 + gamma(s)) dB0_s

with ``gamma(s) = (1 - p^2) / (1 + p tanh(p lam s)) - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, TimeGrid


def gamma(s, p: float, lam: float):
    """Filter kernel; ``gamma(0) = -p**2`` and ``gamma -> -p`` as ``s -> inf``.

    Solves ``gamma' = lam (gamma^2 - p^2)``.
    """
    out = (1.0 - p * p) / (1.0 + p * np.tanh(p * lam * np.asarray(s, dtype=float))) - 1.0
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class FilterPath:
    grid: TimeGrid
    gamma_vals: np.ndarray
    b0: np.ndarray
    upsilon0: np.ndarray
    mu0: np.ndarray


def filter_step(b0, upsilon0, dy, dt: float, t: float, params: ModelParams, kernel=gamma):
    """Advance ``(b0, upsilon0)`` from ``t`` to ``t + dt`` given ``dy``.

    The innovation uses the pre-update drift adjustment (predictor form);
    the kernel ``1 + gamma`` is evaluated at the left point ``t``.
    """
    db0 = dy - upsilon0 * dt
    gain = params.lam * (1.0 + kernel(t, params.p, params.lam))
    return b0 + db0, math.exp(-params.lam * dt) * upsilon0 - gain * db0


def run_filter(y: np.ndarray, params: ModelParams, grid: TimeGrid, kernel=gamma) -> FilterPath:
    """Run the filter causally over an observed driver path.

    Only the observation ``y`` enters; pass ``MarketPath.y``. ``y`` may be a
    single path or a block with time on the last axis.
    """
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != grid.n_steps + 1:
        raise ValueError(f"grid mismatch: y has {y.shape[-1]} points, grid has {grid.n_steps + 1}")
    dt = grid.dt
    times = grid.times
    gvals = np.asarray(kernel(times, params.p, params.lam), dtype=float)
    decay = math.exp(-params.lam * dt)
    gains = params.lam * (1.0 + gvals)

    # time-major layout keeps the per-step slices contiguous; a single path
    # is carried as a block of one so every slice is an array
    lead = y.shape[:-1]
    dy = np.ascontiguousarray(np.diff(y.reshape(-1, y.shape[-1]), axis=-1).T)
    ups = np.empty((grid.n_steps + 1, dy.shape[1]))
    db0 = np.empty_like(dy)
    ups[0] = 0.0
    v = ups[0]
    for k in range(grid.n_steps):
        np.subtract(dy[k], v * dt, out=db0[k])
        v = decay * v - gains[k] * db0[k]
        ups[k + 1] = v

    b0 = np.zeros_like(ups)
    np.cumsum(db0, axis=0, out=b0[1:])
    b0 = b0.T.reshape(lead + (grid.n_steps + 1,))
    ups = ups.T.reshape(lead + (grid.n_steps + 1,))
    mu0 = params.mu(times) + ups * params.sigma(times)
    return FilterPath(grid, gvals, b0, ups, mu0)
