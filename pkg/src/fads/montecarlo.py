"""Many-path experiments: estimators with standard errors, perturbation
tests of the optimal rule, and convergence studies in step and path count.

Paths are processed in fixed-size blocks. Block boundaries depend only on
the experiment, each path draws from its own ``(seed, index)`` stream, and
per-path outcomes are concatenated in index order before any statistic is
taken, so results are bitwise identical for any worker count.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels, valuation
from .dynamics import informed_view, market_from_normals, ou_transition
from .filtering import gamma as gamma_kernel
from .filtering import run_filter
from .model import ModelParams, TimeGrid, integrate, validate_params
from .rng import path_normals, path_stream
from .strategy import log_wealth, optimal_portfolio, sharpe

log = logging.getLogger(__name__)

LOG_WEALTH_LIMIT = 700.0

ESTIMANDS = ("expected_log_utility", "expected_power_utility", "upsilon_second_moment",
             "terminal_wealth_mean")


class WealthOverflowError(FloatingPointError):
    def __init__(self, seed: int, path_index: int, value: float):
        super().__init__(f"|log wealth| = {abs(value):.4g} exceeds {LOG_WEALTH_LIMIT} "
                         f"on path {path_index} (seed {seed})")
        self.seed = seed
        self.path_index = path_index


@dataclass(frozen=True)
class Rule:
    """Portfolio rule: the optimal weight, a scaled optimal weight, or a constant."""

    kind: str = "optimal"
    value: float = 1.0

    def __post_init__(self):
        if self.kind not in ("optimal", "scaled", "constant"):
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if self.kind == "scaled" and not self.value > 0:
            raise ValueError("scaled rule needs a factor > 0")
        if self.kind == "optimal":
            object.__setattr__(self, "value", 1.0)

    @classmethod
    def parse(cls, text: str) -> "Rule":
        """``optimal``, ``scaled:<factor>`` or ``constant:<weight>``."""
        kind, _, arg = str(text).partition(":")
        return cls(kind.strip(), float(arg) if arg else 1.0)

    def __str__(self):
        return "optimal" if self.kind == "optimal" else f"{self.kind}:{self.value!r}"

    @property
    def factor(self) -> float | None:
        return self.value if self.kind in ("optimal", "scaled") else None


@dataclass(frozen=True)
class Estimand:
    kind: str
    t: float | None = None

    def __post_init__(self):
        if self.kind not in ESTIMANDS:
            raise ValueError(f"unknown estimand {self.kind!r}; expected one of {ESTIMANDS}")
        if self.kind == "upsilon_second_moment" and self.t is None:
            raise ValueError("upsilon_second_moment needs a time t")

    @classmethod
    def parse(cls, text: str) -> "Estimand":
        """e.g. ``expected_log_utility`` or ``upsilon_second_moment:1.0``."""
        kind, _, arg = str(text).partition(":")
        return cls(kind.strip(), float(arg) if arg else None)

    def __str__(self):
        return self.kind if self.t is None else f"{self.kind}:{self.t!r}"


@dataclass(frozen=True)
class ExperimentSpec:
    params: ModelParams
    n_paths: int
    n_steps: int
    seed: int
    investor: str = "informed"
    rule: Rule = field(default_factory=Rule)
    estimand: Estimand = field(default_factory=lambda: Estimand("expected_log_utility"))

    def __post_init__(self):
        validate_params(self.params)
        if isinstance(self.rule, str):
            object.__setattr__(self, "rule", Rule.parse(self.rule))
        if isinstance(self.estimand, str):
            object.__setattr__(self, "estimand", Estimand.parse(self.estimand))
        if self.n_paths < 2:
            raise ValueError("n_paths must be at least 2 for a standard error")
        if self.n_steps < 1:
            raise ValueError("n_steps must be at least 1")
        if self.investor not in valuation.INVESTORS:
            raise ValueError(f"investor must be one of {valuation.INVESTORS}")
        if self.estimand.t is not None:
            self.grid.index_of(self.estimand.t)

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.n_steps, self.params.T)

    def replace(self, **changes) -> "ExperimentSpec":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class EstimateResult:
    estimand: str
    value: float
    std_error: float
    n_paths: int
    n_steps: int
    seed: int
    closed_form: float | None = None
    z_score: float | None = None

    def to_record(self) -> dict:
        keys = ("estimand", "value", "std_error", "closed_form", "z_score", "n_paths",
                "n_steps", "seed")
        d = asdict(self)
        return {k: d[k] for k in keys}


# -- per-block simulation ---------------------------------------------------

BLOCK_PATHS = 2048


def _blocks(n_paths: int) -> list[tuple[int, int]]:
    return [(a, min(a + BLOCK_PATHS, n_paths)) for a in range(0, n_paths, BLOCK_PATHS)]


def _variant_arrays(variants):
    kinds = np.array([_kernels.RULE_CONSTANT if r.kind == "constant" else _kernels.RULE_OPTIMAL
                      for r, _ in variants], dtype=np.int64)
    values = np.array([r.value for r, _ in variants], dtype=float)
    gammas = np.array([g for _, g in variants], dtype=float)
    return kinds, values, gammas


def _outcome(estimand: Estimand, log_v, gamma: float):
    if estimand.kind == "expected_log_utility":
        return log_v
    if estimand.kind == "expected_power_utility":
        if gamma == 0:
            return log_v
        return np.expm1(gamma * log_v) / gamma
    return np.exp(log_v)


def _block_outcomes(args) -> np.ndarray:
    """Outcomes for paths ``start..stop-1`` under each ``(rule, gamma)`` variant.

    Returns shape ``(m, len(variants))``; all variants share the same noise.
    """
    params, n_steps, seed, investor, estimand, variants, start, stop = args
    grid = TimeGrid(n_steps, params.T)
    t = grid.times[:-1]
    mu_k, sig_k, r_k = (np.ascontiguousarray(c(t), dtype=float)
                        for c in (params.mu, params.sigma, params.r))
    gains = params.lam * (1.0 + gamma_kernel(t, params.p, params.lam))
    decay, var = ou_transition(params.lam, grid.dt)
    moment = estimand.kind == "upsilon_second_moment"
    t_index = grid.index_of(estimand.t) if moment else -1
    kinds, values, gammas = _variant_arrays([] if moment else variants)
    log_v = np.empty(len(kinds))
    max_abs = np.empty(len(kinds))
    out = np.empty((stop - start, len(variants)))
    for row, idx in enumerate(range(start, stop)):
        ups = _kernels.path_kernel(
            path_stream(seed, idx), n_steps, grid.dt, decay, math.sqrt(var), params.p, params.q,
            params.lam, investor == "informed", mu_k, sig_k, r_k, gains, kinds, values, gammas,
            math.log(params.x0), t_index, log_v, max_abs)
        if moment:
            out[row, :] = ups * ups
            continue
        if max_abs.max() > LOG_WEALTH_LIMIT:
            raise WealthOverflowError(seed, idx, float(max_abs.max()))
        for j, (_, g) in enumerate(variants):
            out[row, j] = _outcome(estimand, log_v[j], g)
    return out


def reference_block_outcomes(args) -> np.ndarray:
    """Same contract as the fused kernel, computed with the array modules.

    Slow and memory hungry; exists to cross-check the kernel.
    """
    params, n_steps, seed, investor, estimand, variants, start, stop = args
    grid = TimeGrid(n_steps, params.T)
    path = market_from_normals(params, grid, path_normals(seed, start, stop, n_steps, 2))
    if investor == "informed":
        view = informed_view(path, params)
        ups, mu_i, db = view.upsilon1, view.mu1, np.diff(view.b1, axis=-1)
    else:
        filt = run_filter(path.y, params, grid)
        ups, mu_i, db = filt.upsilon0, filt.mu0, np.diff(filt.b0, axis=-1)
    if estimand.kind == "upsilon_second_moment":
        col = ups[:, grid.index_of(estimand.t)] ** 2
        return np.repeat(col[:, None], len(variants), axis=1)
    theta = sharpe(mu_i, params, grid).theta
    out = np.empty((stop - start, len(variants)))
    for j, (rule, g) in enumerate(variants):
        if rule.kind == "constant":
            pi = np.full(n_steps + 1, rule.value)
        else:
            pi = rule.value * optimal_portfolio(mu_i, params, grid, gamma=g)
        log_v = log_wealth(db, theta, pi, params, grid)
        bad = np.abs(log_v).max(axis=-1) > LOG_WEALTH_LIMIT
        if bad.any():
            row = int(np.argmax(bad))
            raise WealthOverflowError(seed, start + row, float(np.abs(log_v[row]).max()))
        out[:, j] = _outcome(estimand, log_v[:, -1], g)
    return out


def _collect(spec: ExperimentSpec, variants: Sequence[tuple[Rule, float]], workers: int) -> np.ndarray:
    if spec.estimand.kind != "upsilon_second_moment":
        if any(r.kind != "constant" for r, _ in variants) and not spec.params.r.is_zero():
            raise ValueError("optimal and scaled rules assume r = 0; use a constant rule "
                             "for markets with a nonzero rate")
    jobs = [(spec.params, spec.n_steps, spec.seed, spec.investor, spec.estimand, tuple(variants),
             a, b) for a, b in _blocks(spec.n_paths)]
    if workers <= 1 or len(jobs) == 1:
        parts = [_block_outcomes(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_block_outcomes, jobs))
    return np.concatenate(parts, axis=0)


def _summarize(samples: np.ndarray) -> tuple[float, float]:
    if samples[0] == samples[-1] and np.all(samples == samples[0]):
        return float(samples[0]), 0.0
    return float(np.mean(samples)), float(np.std(samples, ddof=1) / math.sqrt(samples.size))


# -- closed forms -----------------------------------------------------------

def closed_form(spec: ExperimentSpec, rule: Rule | None = None, gamma: float | None = None) -> float | None:
    """Exact expectation of the estimand when one is available, else ``None``."""
    params = spec.params
    rule = spec.rule if rule is None else rule
    g = params.gamma if gamma is None else gamma
    kind = spec.estimand.kind
    T, x0 = params.T, params.x0
    if kind == "upsilon_second_moment":
        return valuation.upsilon_variance(spec.estimand.t, spec.investor, params)
    if rule.kind == "constant":
        w = rule.value
        if w == 0:
            return {"expected_log_utility": math.log(x0), "terminal_wealth_mean": x0,
                    "expected_power_utility": math.log(x0) if g == 0 else (x0**g - 1) / g}[kind]
        if kind == "expected_log_utility":
            drift = w * (params.mu - params.r) - 0.5 * w * w * params.sigma**2
            return math.log(x0) + integrate(drift, 0.0, T)
        if kind == "terminal_wealth_mean" and params.q == 0:
            return x0 * math.exp(integrate(w * (params.mu - params.r), 0.0, T))
        return None
    if not params.r.is_zero():
        return None
    f = rule.value
    if kind == "expected_log_utility" or (kind == "expected_power_utility" and g == 0):
        # pi = f * theta / ((1 - g) sigma): E log V = log x + c (1 - c/2) E int theta^2
        c = f / (1.0 - g)
        e2 = valuation.value_function(spec.investor, params.replace(gamma=0.0)).e_int_theta2
        return math.log(x0) + (c - 0.5 * c * c) * e2
    if kind == "expected_power_utility" and f == 1.0 and params.q == 0:
        # the log-linear power value is an expectation only for a deterministic Sharpe ratio
        return valuation.value_function(spec.investor, params.replace(gamma=g)).u_pow
    if kind == "terminal_wealth_mean" and params.q == 0:
        pi = f * params.mu / ((1.0 - g) * params.sigma**2)
        return x0 * math.exp(integrate(pi * params.mu, 0.0, T))
    return None


def _result(spec: ExperimentSpec, samples: np.ndarray, cf: float | None) -> EstimateResult:
    value, se = _summarize(samples)
    z = None
    if cf is not None:
        if se > 0:
            z = (value - cf) / se
        elif value == cf:
            z = 0.0
    return EstimateResult(str(spec.estimand), value, se, spec.n_paths, spec.n_steps, spec.seed, cf, z)


# -- public operations --------------------------------------------------------

def run_experiment(spec: ExperimentSpec, workers: int = 1) -> EstimateResult:
    """Estimate the experiment's estimand by Monte Carlo, with closed form when known."""
    samples = _collect(spec, [(spec.rule, spec.params.gamma)], workers)[:, 0]
    return _result(spec, samples, closed_form(spec))


@dataclass(frozen=True)
class PerturbationRow:
    factor: float
    estimate: EstimateResult
    diff_from_optimal: float
    diff_std_error: float

    @property
    def paired_z(self) -> float:
        """z-score of ``objective(1.0) - objective(factor)``; inf when noise-free."""
        if self.diff_std_error > 0:
            return self.diff_from_optimal / self.diff_std_error
        return 0.0 if self.diff_from_optimal == 0 else math.copysign(math.inf, self.diff_from_optimal)


def perturbation_test(spec: ExperimentSpec, factors: Sequence[float], workers: int = 1,
                      gammas: Sequence[float] | None = None) -> dict[float, list[PerturbationRow]]:
    """Objective under ``factor * pi*`` for each factor, with common random numbers.

    The objective is ``E U_gamma(Vtilde_T)``, i.e. ``E log Vtilde_T`` at
    ``gamma = 0`` and ``E (Vtilde_T^gamma - 1)/gamma`` otherwise. Each row
    carries the paired difference ``objective(1.0) - objective(factor)``.
    Several risk-aversion levels can share one simulation through ``gammas``;
    the result is keyed by gamma.
    """
    factors = [float(f) for f in factors]
    if 1.0 not in factors:
        raise ValueError("factors must include 1.0")
    gammas = [spec.params.gamma] if gammas is None else [float(g) for g in gammas]
    for g in gammas:
        validate_params(spec.params.replace(gamma=g))
    spec = spec.replace(estimand=Estimand("expected_power_utility"))
    variants = [(Rule("scaled", f), g) for g in gammas for f in factors]
    samples = _collect(spec, variants, workers)
    out: dict[float, list[PerturbationRow]] = {}
    nf = len(factors)
    for gi, g in enumerate(gammas):
        cols = samples[:, gi * nf:(gi + 1) * nf]
        ref = cols[:, factors.index(1.0)]
        rows = []
        for j, f in enumerate(factors):
            sub = spec.replace(params=spec.params.replace(gamma=g), rule=Rule("scaled", f))
            est = _result(sub, cols[:, j], closed_form(sub))
            diff_mean, diff_se = _summarize(ref - cols[:, j])
            rows.append(PerturbationRow(f, est, diff_mean, diff_se))
        out[g] = rows
    return out


def convergence_study(spec: ExperimentSpec, step_counts: Sequence[int],
                      path_counts: Sequence[int], workers: int = 1) -> list[dict]:
    """Estimates over a grid of step and path counts.

    ``bias_proxy`` is ``|estimate - closed_form|`` when a closed form exists.
    """
    for name, seq in (("step_counts", step_counts), ("path_counts", path_counts)):
        if not seq or list(seq) != sorted(seq):
            raise ValueError(f"{name} must be non-empty and ascending")
    rows = []
    for n in step_counts:
        for m in path_counts:
            res = run_experiment(spec.replace(n_steps=int(n), n_paths=int(m)), workers)
            bias = None if res.closed_form is None else abs(res.value - res.closed_form)
            rows.append({"n_steps": int(n), "n_paths": int(m), "value": res.value,
                         "std_error": res.std_error, "closed_form": res.closed_form,
                         "bias_proxy": bias})
    return rows
