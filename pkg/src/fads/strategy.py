"""Sharpe ratios, optimal CRRA portfolios and self-financing wealth."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, TimeGrid


@dataclass(frozen=True)
class SharpeSeries:
    theta: np.ndarray
    theta_gamma: np.ndarray


def sharpe(mu_i: np.ndarray, params: ModelParams, grid: TimeGrid) -> SharpeSeries:
    """Investor-specific Sharpe ratio ``(mu_i - r) / sigma`` on the grid.

    ``theta_gamma`` is the risk-adjusted ratio ``theta / (1 - gamma)``.
    """
    t = grid.times
    theta = (np.asarray(mu_i) - params.r(t)) / params.sigma(t)
    return SharpeSeries(theta, theta / (1.0 - params.gamma))


def optimal_portfolio(mu_i: np.ndarray, params: ModelParams, grid: TimeGrid,
                      gamma: float | None = None) -> np.ndarray:
    """CRRA-optimal stock weight ``mu_i / ((1 - gamma) sigma^2)``.

    The closed form holds for a zero interest rate only, so a nonzero ``r``
    curve is refused. ``gamma = 0`` gives the log-utility rule.
    """
    if not params.r.is_zero():
        raise ValueError("optimal portfolio formula assumes r = 0; configure a zero rate curve")
    g = params.gamma if gamma is None else gamma
    if g >= 1:
        raise ValueError("gamma must be strictly less than 1")
    sig = params.sigma(grid.times)
    return np.asarray(mu_i) / ((1.0 - g) * sig**2)


@dataclass(frozen=True)
class WealthPath:
    grid: TimeGrid
    pi: np.ndarray
    v: np.ndarray
    v_tilde: np.ndarray

    @property
    def log_v_tilde(self) -> np.ndarray:
        return np.log(self.v_tilde)


def log_wealth(db: np.ndarray, theta: np.ndarray, pi: np.ndarray, params: ModelParams,
               grid: TimeGrid) -> np.ndarray:
    """Log discounted wealth on the grid, ``log Vtilde_t``.

    Each step uses the left-point weight ``pi[k]`` against the forward
    increment ``db[k]``, so only information available at ``t_k`` is used.
    """
    n = grid.n_steps
    db = np.asarray(db, dtype=float)
    if db.shape[-1] != n:
        raise ValueError(f"expected {n} Brownian increments, got {db.shape[-1]}")
    pi = np.broadcast_to(np.asarray(pi, dtype=float), np.broadcast_shapes(np.shape(pi), (n + 1,)))
    theta = np.asarray(theta, dtype=float)
    if pi.shape[-1] != n + 1 or theta.shape[-1] != n + 1:
        raise ValueError("pi and theta must have one value per grid point")
    sig = params.sigma(grid.times[:-1])
    exposure = pi[..., :-1] * sig
    incr = (exposure * theta[..., :-1] - 0.5 * exposure**2) * grid.dt + exposure * db
    out = np.empty(incr.shape[:-1] + (n + 1,))
    out[..., 0] = math.log(params.x0)
    np.cumsum(incr, axis=-1, out=out[..., 1:])
    out[..., 1:] += math.log(params.x0)
    return out


def evolve_wealth(db: np.ndarray, theta: np.ndarray, pi, params: ModelParams,
                  grid: TimeGrid) -> WealthPath:
    """Self-financing wealth for portfolio ``pi`` in log space.

    ``db`` are the investor's Brownian increments (``B1`` or ``B0``) and
    ``theta`` the matching Sharpe series. Discounted wealth follows the
    exponential solution; undiscounted wealth adds back ``int r``.
    """
    log_vt = log_wealth(db, theta, pi, params, grid)
    rate = params.r(grid.times[:-1]) * grid.dt
    growth = np.concatenate([[0.0], np.cumsum(rate)])
    pi_full = np.broadcast_to(np.asarray(pi, dtype=float), log_vt.shape)
    # scale by x0 rather than exponentiating log x0 so zero exposure keeps x0 exactly
    h = log_vt - math.log(params.x0)
    x0 = params.x0
    return WealthPath(grid, np.array(pi_full), x0 * np.exp(h + growth), x0 * np.exp(h))


@dataclass(frozen=True)
class UtilityOutcome:
    h: float
    u_log: float
    u_pow: float

    def power_utility(self, gamma: float) -> float:
        """General CRRA utility ``(w^gamma - 1) / gamma``; log wealth at gamma = 0."""
        if gamma == 0:
            return self.u_log
        return (self.u_pow - 1.0) / gamma


def utility_outcome(wealth: WealthPath, gamma: float) -> UtilityOutcome:
    if wealth.v_tilde.ndim != 1:
        raise ValueError("utility_outcome expects a single wealth path")
    vt, x0 = float(wealth.v_tilde[-1]), float(wealth.v_tilde[0])
    if not vt > 0:
        raise FloatingPointError("terminal discounted wealth is not positive")
    h = math.log(vt) - math.log(x0)
    u_log = math.log(x0) + h
    return UtilityOutcome(h, u_log, math.exp(gamma * u_log))
