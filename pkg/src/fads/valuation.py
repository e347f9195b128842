"""Closed-form and asymptotic value functions for both investors.

Everything here is deterministic: the expected squared Sharpe ratio splits
into the market part ``int (mu/sigma)^2`` plus the cumulative variance of the
drift adjustment, because the adjustment has zero mean.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Literal

from .filtering import gamma as gamma_kernel
from .model import ModelParams, integrate
from .quadrature import adaptive_simpson

log = logging.getLogger(__name__)

Investor = Literal["informed", "uninformed"]
INVESTORS: tuple[Investor, ...] = ("informed", "uninformed")
QUAD_TOL = 1e-9


def _check_investor(investor: str) -> None:
    if investor not in INVESTORS:
        raise ValueError(f"investor must be one of {INVESTORS}, got {investor!r}")


def _uninformed_gain(params: ModelParams, kernel):
    p, lam = params.p, params.lam
    return lambda s: 1.0 + kernel(s, p, lam)


def upsilon_variance(t: float, investor: Investor, params: ModelParams, kernel=gamma_kernel) -> float:
    """Second moment of the drift adjustment at time ``t``.

    Informed: ``(lam/2) q^2 (1 - exp(-2 lam t))``. Uninformed: adaptive
    quadrature of ``lam^2 int_0^t exp(-2 lam (t-s)) (1 + gamma(s))^2 ds``.
    """
    _check_investor(investor)
    if t < 0:
        raise ValueError("t must be non-negative")
    lam = params.lam
    if investor == "informed":
        return 0.5 * lam * params.q**2 * -math.expm1(-2.0 * lam * t)
    g = _uninformed_gain(params, kernel)
    # the lam^2 prefactor amplifies quadrature error; aim for ~1e-12 on the moment
    tol = min(QUAD_TOL, 1e-12 / (lam * lam))
    return lam * lam * adaptive_simpson(lambda s: math.exp(-2.0 * lam * (t - s)) * g(s) ** 2,
                                        0.0, t, tol=tol)


def cumulative_upsilon_variance(T: float, investor: Investor, params: ModelParams,
                                kernel=gamma_kernel) -> float:
    """``int_0^T E[upsilon_t^2] dt`` for one investor.

    The double integral is reduced by swapping the order of integration:
    ``int_0^T (lam/2) g(s)^2 (1 - exp(-2 lam (T - s))) ds`` with ``g = q``
    (informed, done in closed form) or ``g = 1 + gamma`` (uninformed).
    """
    _check_investor(investor)
    if T < 0:
        raise ValueError("T must be non-negative")
    lam = params.lam
    if investor == "informed":
        return 0.5 * lam * params.q**2 * (T + math.expm1(-2.0 * lam * T) / (2.0 * lam))
    g = _uninformed_gain(params, kernel)
    return 0.5 * lam * adaptive_simpson(
        lambda s: g(s) ** 2 * -math.expm1(-2.0 * lam * (T - s)), 0.0, T, tol=QUAD_TOL)


def asymptotic_variance_rate(investor: Investor, params: ModelParams) -> float:
    """Long-run ``E[upsilon^2]``: ``(lam/2)(1-p)(1+p)`` informed, ``(lam/2)(1-p)^2`` uninformed."""
    _check_investor(investor)
    sign = 1.0 if investor == "informed" else -1.0
    return 0.5 * params.lam * (1.0 - params.p) * (1.0 + sign * params.p)


def market_sharpe_integral(params: ModelParams) -> float:
    """``int_0^T (mu / sigma)^2 dt``; requires ``r = 0``."""
    return integrate((params.mu / params.sigma) ** 2, 0.0, params.T)


def _require_zero_rate(params: ModelParams) -> None:
    if not params.r.is_zero():
        raise ValueError("closed-form value functions assume a zero risk-free rate (r = 0); "
                         "nonzero r is only supported through Monte Carlo on explicit rules")


def _risk_coefficient(g: float) -> float:
    return g / (2.0 * (1.0 - g))


@dataclass(frozen=True)
class ValueReport:
    investor: str
    gamma: float
    x0: float
    e_int_theta2: float
    u_log: float
    u_pow: float
    psi: float
    u_log_asym: float
    psi_asym: float
    excess_log_asym: float
    excess_psi_asym: float
    wealth_relative: float

    def to_dict(self) -> dict:
        return asdict(self)


def excess_asymptotics(params: ModelParams) -> dict[str, float]:
    """Informed-minus-uninformed asymptotic quantities.

    ``excess_log_asym = (lam/2) p (1-p) T``; the power-utility excess scales
    ``lam p (1-p) T`` by ``gamma / (2 (1 - gamma))`` and the wealth relative
    is its exponential.
    """
    base = params.lam * params.p * (1.0 - params.p) * params.T
    excess_psi = _risk_coefficient(params.gamma) * base
    return {
        "excess_log_asym": 0.5 * base,
        "excess_psi_asym": excess_psi,
        "wealth_relative": math.exp(excess_psi),
    }


def value_function(investor: Investor, params: ModelParams, kernel=gamma_kernel) -> ValueReport:
    """Value report for one investor under the configured ``gamma``.

    For ``gamma = 0`` the log-linear value ``psi`` is 0 and ``u_pow`` is the
    ``gamma -> 0`` limit of ``(exp(psi) - 1)/gamma``, i.e. ``u_log``. For
    ``gamma < 0`` ``u_pow`` is negative-valued.

    The power fields use the log-linear formula in ``E int theta^2``. It is
    the exact expected utility only when the Sharpe ratio is deterministic
    (``p = 1``); with a random drift adjustment the true ``E U_gamma`` under
    the myopic rule differs, and the Monte Carlo module does not treat
    ``u_pow`` as a closed form in that case.
    """
    _check_investor(investor)
    _require_zero_rate(params)
    g, x0, T = params.gamma, params.x0, params.T
    market = market_sharpe_integral(params)
    e_theta2 = market + cumulative_upsilon_variance(T, investor, params, kernel)
    e_theta2_asym = market + asymptotic_variance_rate(investor, params) * T

    u_log = math.log(x0) + 0.5 * e_theta2
    u_log_asym = math.log(x0) + 0.5 * e_theta2_asym
    psi = g * math.log(x0) + _risk_coefficient(g) * e_theta2
    psi_asym = g * math.log(x0) + _risk_coefficient(g) * e_theta2_asym
    u_pow = u_log if g == 0 else math.expm1(psi) / g
    return ValueReport(
        investor=investor, gamma=g, x0=x0, e_int_theta2=e_theta2,
        u_log=u_log, u_pow=u_pow, psi=psi, u_log_asym=u_log_asym, psi_asym=psi_asym,
        **excess_asymptotics(params),
    )


def asymptotic_report(params: ModelParams) -> dict:
    """Per-investor asymptotic values plus informed-minus-uninformed excess."""
    _require_zero_rate(params)
    if params.lam * params.T < 10:
        log.warning("lambda*T = %.3g < 10: asymptotic formulas may be far from finite-T values",
                    params.lam * params.T)
    g, x0 = params.gamma, params.x0
    market = market_sharpe_integral(params)
    out: dict = {}
    for inv in INVESTORS:
        e2 = market + asymptotic_variance_rate(inv, params) * params.T
        out[inv] = {
            "u_log_asym": math.log(x0) + 0.5 * e2,
            "psi_asym": g * math.log(x0) + _risk_coefficient(g) * e2,
        }
    out.update(excess_asymptotics(params))
    return out


def gamma_to_zero_limit(params: ModelParams, gammas: Iterable[float],
                        investor: Investor = "informed") -> list[dict]:
    """``psi(x; gamma) / gamma`` against the log-utility value for each gamma.

    ``psi`` is recovered through ``log(1 + gamma * u_pow)`` so the table
    exercises the power-utility route end to end.
    """
    rows = []
    u_log = value_function(investor, params.replace(gamma=0.0)).u_log
    for g in gammas:
        if g == 0 or abs(g) > 0.5:
            raise ValueError("gammas must be nonzero with |gamma| <= 0.5")
        rep = value_function(investor, params.replace(gamma=g))
        ratio = math.log1p(g * rep.u_pow) / g
        rows.append({"gamma": g, "psi_over_gamma": ratio, "u_log": u_log,
                     "gap": abs(ratio - u_log)})
    return rows
