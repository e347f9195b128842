"""Acceptance checks: closed forms against quadrature and Monte Carlo.

Each check returns a :class:`CheckResult` with status ``pass``, ``fail`` or
``inconclusive``. Monte Carlo checks are inconclusive when their standard
error is too wide to resolve the tolerance (small ``n_paths``), rather than
failing. Wall-clock runtimes are logged and kept on the result objects but
left out of the written report so the report is reproducible byte for byte.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import valuation
from .dynamics import simulate_ou
from .filtering import gamma as gamma_kernel
from .model import ModelParams, TimeGrid, validate_params
from .montecarlo import Estimand, ExperimentSpec, Rule, perturbation_test, run_experiment
from .rng import path_normals

log = logging.getLogger(__name__)

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class CheckResult:
    criterion: int
    name: str
    status: str
    metrics: dict = field(default_factory=dict)
    budget_s: float = 0.0
    runtime_s: float = 0.0

    def to_record(self) -> dict:
        return {"criterion": self.criterion, "name": self.name, "status": self.status,
                "runtime_budget_s": self.budget_s, **self.metrics}


@dataclass(frozen=True)
class Scale:
    """Overrides for the Monte Carlo checks; ``None`` keeps each check's own size."""

    n_paths: int | None = None
    n_steps: int | None = None
    seed: int = 20240501
    workers: int = 1

    def paths(self, default: int) -> int:
        return default if self.n_paths is None else max(2, self.n_paths)

    def steps(self, default: int) -> int:
        return default if self.n_steps is None else self.n_steps


def market(**overrides) -> ModelParams:
    base = dict(r=0.0, mu=0.08, sigma=0.2, lam=1.0, p=0.6, gamma=0.0, T=1.0)
    base.update(overrides)
    return ModelParams(**base)


def _mc_status(ok: bool, se: float, se_max: float) -> str:
    # a wide standard error can neither confirm nor refute the tolerance
    if se > se_max:
        return INCONCLUSIVE
    return PASS if ok else FAIL


# -- individual checks ----------------------------------------------------------

def check_gamma_ode(kernel=gamma_kernel, **_) -> CheckResult:
    h, lam = 1e-5, 1.0
    s = np.linspace(0.0, 20.0, 20_001)
    worst = 0.0
    for p in (0.25, 0.5, 0.75):
        deriv = (kernel(s + h, p, lam) - kernel(s - h, p, lam)) / (2 * h)
        resid = np.abs(deriv - lam * (kernel(s, p, lam) ** 2 - p * p))
        worst = max(worst, float(resid.max()))
    return CheckResult(1, "gamma_ode_residual", PASS if worst < 1e-6 else FAIL,
                       {"max_residual": worst, "tolerance": 1e-6}, 1.0)


def check_ou_variance(scale: Scale, **_) -> CheckResult:
    lam, n_paths, n_steps = 0.5, scale.paths(100_000), scale.steps(10)
    grid = TimeGrid(n_steps, 1.0)
    u, _ = simulate_ou(grid, lam, path_normals(scale.seed, 0, n_paths, n_steps, 1)[..., 0])
    ut = u[:, -1]
    dev = (ut - ut.mean()) ** 2
    value = float(dev.sum() / (n_paths - 1))
    se = float(dev.std(ddof=1) / math.sqrt(n_paths))
    target = -math.expm1(-2 * lam) / (2 * lam)
    z = (value - target) / se
    return CheckResult(2, "ou_variance", _mc_status(abs(z) < 3, se, 0.01),
                       {"value": value, "target": target, "std_error": se, "z_score": z,
                        "n_paths": n_paths, "n_steps": n_steps}, 10.0)


def _moment_check(criterion: int, name: str, investor: str, n_steps: int, scale: Scale,
                  se_max: float, budget: float, allowance_steps: float = 0.0) -> CheckResult:
    spec = ExperimentSpec(market(), scale.paths(100_000), scale.steps(n_steps), scale.seed,
                          investor, Rule(), Estimand("upsilon_second_moment", 1.0))
    res = run_experiment(spec, workers=scale.workers)
    allowance = allowance_steps * spec.grid.dt
    ok = abs(res.value - res.closed_form) < 3 * res.std_error + allowance
    return CheckResult(criterion, name, _mc_status(ok, res.std_error, se_max),
                       {**res.to_record(), "allowance": allowance}, budget)


def check_informed_moment(scale: Scale, **_) -> CheckResult:
    return _moment_check(3, "informed_upsilon_moment", "informed", 100, scale, 0.005, 10.0)


def check_uninformed_moment(scale: Scale, **_) -> CheckResult:
    return _moment_check(4, "uninformed_filter_moment", "uninformed", 10_000, scale, 0.0025,
                         120.0, allowance_steps=2.0)


def check_variance_bound(kernel=gamma_kernel, **_) -> CheckResult:
    worst = -math.inf
    for lam in (0.1, 1.0, 10.0):
        for p in (0.0, 0.25, 0.5, 0.75, 1.0):
            params = market(lam=lam, p=p)
            bound = 0.5 * lam * params.q**2
            for t in (0.1, 1.0, 10.0):
                for inv in valuation.INVESTORS:
                    v = valuation.upsilon_variance(t, inv, params, kernel)
                    worst = max(worst, v - bound)
    return CheckResult(5, "variance_bound_lattice", PASS if worst <= 1e-12 else FAIL,
                       {"max_excess_over_bound": worst, "tolerance": 1e-12}, 1.0)


def check_excess_cumulative(kernel=gamma_kernel, **_) -> CheckResult:
    params = market(lam=1.0, p=0.5, T=40.0)
    excess = (valuation.cumulative_upsilon_variance(40.0, "informed", params, kernel)
              - valuation.cumulative_upsilon_variance(40.0, "uninformed", params, kernel))
    target = params.lam * params.p * (1 - params.p) * params.T
    rel = abs(excess - target) / target
    return CheckResult(6, "excess_cumulative_variance", PASS if rel < 0.02 else FAIL,
                       {"value": excess, "target": target, "relative_error": rel,
                        "tolerance": 0.02}, 1.0)


def check_log_utility(scale: Scale, **_) -> CheckResult:
    spec = ExperimentSpec(market(), scale.paths(100_000), scale.steps(1000), scale.seed,
                          "informed", Rule(), Estimand("expected_log_utility"))
    res = run_experiment(spec, workers=scale.workers)
    allowance = 2 * spec.grid.dt
    ok = abs(res.value - res.closed_form) < 3 * res.std_error + allowance
    return CheckResult(7, "log_utility_value", _mc_status(ok, res.std_error, 0.006),
                       {**res.to_record(), "allowance": allowance}, 120.0)


def check_perturbation(scale: Scale, **_) -> CheckResult:
    gammas = (0.0, 0.5, -1.0)
    rows = []
    all_ok, widest = True, 0.0
    for inv in valuation.INVESTORS:
        spec = ExperimentSpec(market(), scale.paths(100_000), scale.steps(1000), scale.seed, inv)
        table = perturbation_test(spec, (0.8, 1.0, 1.2), workers=scale.workers, gammas=gammas)
        for g in gammas:
            for row in table[g]:
                if row.factor == 1.0:
                    continue
                ok = row.diff_from_optimal > 3 * row.diff_std_error
                all_ok &= ok
                widest = max(widest, row.diff_std_error)
                rows.append({"investor": inv, "gamma": g, "factor": row.factor,
                             "objective": row.estimate.value,
                             "paired_diff": row.diff_from_optimal,
                             "paired_std_error": row.diff_std_error,
                             "paired_z": row.paired_z, "pass": ok})
    return CheckResult(8, "optimality_perturbation", _mc_status(all_ok, widest, 1e-3),
                       {"rows": rows, "n_paths": scale.paths(100_000),
                        "n_steps": scale.steps(1000)}, 300.0)


def value_reports(params: ModelParams) -> dict:
    """Both investors' reports plus finite-T and asymptotic excess quantities."""
    inf = valuation.value_function("informed", params)
    uninf = valuation.value_function("uninformed", params)
    return {
        "informed": inf.to_dict(),
        "uninformed": uninf.to_dict(),
        "excess": {
            "excess_log": inf.u_log - uninf.u_log,
            "excess_psi": inf.psi - uninf.psi,
            "excess_e_int_theta2": inf.e_int_theta2 - uninf.e_int_theta2,
            **valuation.excess_asymptotics(params),
        },
    }


def check_excess_utility(**_) -> CheckResult:
    params = market(lam=1.0, p=0.5, T=20.0, gamma=0.0)
    rep = value_reports(params)["excess"]
    formula = rep["excess_log_asym"]
    rel = abs(rep["excess_log"] - 2.5) / 2.5
    ok = formula == 2.5 and rel < 0.02
    return CheckResult(9, "excess_asymptotic_utility", PASS if ok else FAIL,
                       {"excess_log_asym": formula, "target": 2.5,
                        "finite_T_excess_log": rep["excess_log"], "relative_error": rel,
                        "tolerance": 0.02}, 1.0)


POWER_LOG_SETS = (
    dict(lam=1.0, p=0.6, T=1.0, x0=1.0),
    dict(lam=0.5, p=0.3, T=5.0, x0=2.5, mu=[[0.0, 0.05], [2.0, 0.1]], sigma=[[0.0, 0.25], [3.0, 0.15]]),
    dict(lam=4.0, p=0.9, T=10.0, x0=0.4, mu=-0.03, sigma=0.3),
)


def check_power_log_limit(**_) -> CheckResult:
    worst = 0.0
    for kw in POWER_LOG_SETS:
        row = valuation.gamma_to_zero_limit(market(**kw), [1e-6])[0]
        worst = max(worst, row["gap"] / (1e-5 * (1 + abs(row["u_log"]))))
    return CheckResult(10, "power_log_limit", PASS if worst < 1 else FAIL,
                       {"max_gap_over_tolerance": worst}, 1.0)


def sweep_rows(base: ModelParams, axes: dict[str, list[float]]) -> list[dict]:
    """Value reports over the Cartesian product of sweep axes."""
    names = ("lambda", "p", "gamma", "T")
    defaults = {"lambda": base.lam, "p": base.p, "gamma": base.gamma, "T": base.T}
    grid = [axes.get(n, [defaults[n]]) for n in names]
    for n, values in zip(names, grid):
        if len(values) == 0:
            raise ValueError(f"sweep axis {n!r} is empty")
    rows = []
    for lam in grid[0]:
        for p in grid[1]:
            for g in grid[2]:
                for T in grid[3]:
                    params = validate_params(base.replace(lam=lam, p=p, gamma=g, T=T))
                    rep = value_reports(params)
                    row = {"lambda": lam, "p": p, "gamma": g, "T": T}
                    for inv in valuation.INVESTORS:
                        for k, v in rep[inv].items():
                            if k not in ("investor", "excess_log_asym", "excess_psi_asym",
                                         "wealth_relative"):
                                row[f"{inv}_{k}"] = v
                    row.update(rep["excess"])
                    rows.append(row)
    return rows


def check_sweep_shape(**_) -> CheckResult:
    lam, T = 1.0, 20.0
    ps = [0.0, 0.25, 0.5, 0.75, 1.0]
    rows = sweep_rows(market(lam=lam, T=T), {"p": ps})
    vals = [r["excess_log_asym"] for r in rows]
    expected = [lam * T / 2 * p * (1 - p) for p in ps]
    exact = vals == expected
    symmetric = vals == vals[::-1]
    peak = ps[int(np.argmax(vals))] == 0.5 and vals.count(max(vals)) == 1
    return CheckResult(11, "sweep_shape", PASS if exact and symmetric and peak else FAIL,
                       {"p": ps, "excess_log_asym": vals, "expected": expected,
                        "exact": exact, "symmetric": symmetric, "argmax_at_half": peak}, 1.0)


def check_worker_determinism(scale: Scale, **_) -> CheckResult:
    spec = ExperimentSpec(market(), scale.paths(100_000), 100, scale.seed, "informed", Rule(),
                          Estimand("upsilon_second_moment", 1.0))
    serial = run_experiment(spec, workers=1)
    parallel = run_experiment(spec, workers=4)
    same = serial == parallel
    return CheckResult(12, "worker_determinism", PASS if same else FAIL,
                       {"serial": serial.to_record(), "parallel_4": parallel.to_record(),
                        "identical": same}, 180.0)


CHECKS: tuple[Callable[..., CheckResult], ...] = (
    check_gamma_ode, check_ou_variance, check_informed_moment, check_uninformed_moment,
    check_variance_bound, check_excess_cumulative, check_log_utility, check_perturbation,
    check_excess_utility, check_power_log_limit, check_sweep_shape, check_worker_determinism,
)


def run_check(fn, scale: Scale, kernel=gamma_kernel) -> CheckResult:
    t0 = time.perf_counter()
    res = fn(scale=scale, kernel=kernel)
    res.runtime_s = time.perf_counter() - t0
    log.info("criterion %2d %-28s %-12s %.2fs (budget %.0fs)", res.criterion, res.name,
             res.status, res.runtime_s, res.budget_s)
    return res


def run_all(scale: Scale = Scale(), kernel=gamma_kernel,
            only: set[int] | None = None) -> list[CheckResult]:
    """Run every check (or the criteria listed in ``only``).

    ``kernel`` replaces the filter kernel in the deterministic checks; it is a
    fault-injection hook for testing the runner itself.
    """
    results = []
    for fn in CHECKS:
        res = run_check(fn, scale, kernel) if only is None or _number(fn) in only else None
        if res is not None:
            results.append(res)
    return results


def _number(fn) -> int:
    return CHECKS.index(fn) + 1


def report(results: list[CheckResult], scale: Scale) -> dict:
    counts = {s: sum(r.status == s for r in results) for s in (PASS, FAIL, INCONCLUSIVE)}
    return {
        "seed": scale.seed,
        "n_paths_override": scale.n_paths,
        "n_steps_override": scale.n_steps,
        "summary": {**counts, "all_pass": counts[PASS] == len(results)},
        "checks": [r.to_record() for r in results],
    }
