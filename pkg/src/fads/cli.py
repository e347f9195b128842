"""Command line interface: ``fads simulate | value | sweep | verify``.

Every command takes ``--config`` (defaults to the built-in acceptance
market), ``--seed``, ``--out``, ``--paths`` and ``--steps``. Set ``FADS_LOG``
to a logging level name (``INFO``, ``DEBUG``) for progress messages.
Exit status: 0 on success, 1 when ``verify`` has a non-passing check,
2 on configuration or parameter errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import output, verify
from .dynamics import informed_view, market_from_normals
from .filtering import run_filter
from .model import ParameterError, TimeGrid
from .montecarlo import Rule, WealthOverflowError, run_experiment
from .rng import path_normals
from .strategy import evolve_wealth, optimal_portfolio, sharpe

log = logging.getLogger("fads")


class UsageError(Exception):
    pass


def _load(args) -> cfgmod.RunConfig:
    cfg = cfgmod.load(args.config) if args.config else cfgmod.default_config()
    exp = dict(cfg.experiment)
    if args.seed is not None:
        exp["seed"] = args.seed
    if args.steps is not None:
        if args.steps < 1:
            raise UsageError("--steps must be at least 1")
        exp["n_steps"] = args.steps
    if args.paths is not None:
        if args.paths < 1:
            raise UsageError("--paths must be at least 1")
        exp["n_paths"] = args.paths
    out = dict(cfg.output)
    if args.out is not None:
        out["dir"] = args.out
    return cfgmod.RunConfig(cfg.model, exp, out, cfg.sweep)


def _outdir(cfg) -> Path:
    path = Path(cfg.output["dir"])
    path.mkdir(parents=True, exist_ok=True)
    return path


def _dump_rows(path: Path, header, rows, multi: bool):
    return output.write_csv(path, ("path",) + tuple(header) if multi else header, rows)


# -- simulate -------------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = _load(args)
    params, e = cfg.model, cfg.experiment
    # path dumps are for inspection: one path unless --paths asks for more
    n_paths = 1 if args.paths is None else args.paths
    n_steps, seed = int(e["n_steps"]), int(e["seed"])
    grid = TimeGrid(n_steps, params.T)
    market = market_from_normals(params, grid, path_normals(seed, 0, n_paths, n_steps))
    filt = run_filter(market.y, params, grid)
    if e["investor"] == "informed":
        view = informed_view(market, params)
        mu_i, b_i = view.mu1, view.b1
    else:
        mu_i, b_i = filt.mu0, filt.b0
    theta = sharpe(mu_i, params, grid).theta
    rule = Rule.parse(e["rule"])
    if rule.kind == "constant":
        pi = np.full(mu_i.shape, rule.value)
    else:
        try:
            pi = rule.value * optimal_portfolio(mu_i, params, grid)
        except ValueError as exc:
            raise UsageError(f"{exc}; use experiment.rule = constant:<w>") from None
    wealth = evolve_wealth(np.diff(b_i, axis=-1), theta, pi, params, grid)

    out = _outdir(cfg)
    multi = n_paths > 1
    for name, header, rows_of in (("paths.csv", output.PATH_HEADER, output.path_rows),
                                  ("filter.csv", output.FILTER_HEADER, output.filter_rows),
                                  ("wealth.csv", output.WEALTH_HEADER, output.wealth_rows)):
        obj = {"paths.csv": market, "filter.csv": filt, "wealth.csv": wealth}[name]
        if multi:
            rows = (row for k in range(n_paths) for row in rows_of(_take(obj, k), k))
        else:
            rows = rows_of(_take(obj, 0))
        _dump_rows(out / name, header, rows, multi)
    log.info("wrote %d path(s) x %d steps to %s", n_paths, n_steps, out)
    return 0


def _take(obj, k: int):
    """Single path ``k`` of a block result, keeping shared fields."""
    changes = {}
    for f in fields(obj):
        val = getattr(obj, f.name)
        if isinstance(val, np.ndarray) and val.ndim == 2:
            changes[f.name] = val[k]
    return replace(obj, **changes)


# -- value ------------------------------------------------------------------------

def cmd_value(args) -> int:
    cfg = _load(args)
    if not cfg.model.r.is_zero():
        raise UsageError("value functions are derived for a zero interest rate (r = 0); "
                         "set model.r = 0.0")
    rep = verify.value_reports(cfg.model)
    out = _outdir(cfg)
    if "json" in cfg.output["formats"]:
        output.write_json(out / "value_report.json", rep)
    if "csv" in cfg.output["formats"]:
        keys = [k for k in rep["informed"] if k != "investor"]
        rows = [[inv] + [rep[inv][k] for k in keys] for inv in ("informed", "uninformed")]
        output.write_csv(out / "value_report.csv", ["investor"] + keys, rows)
    if args.mc:
        spec = cfg.experiment_spec()
        res = run_experiment(spec, workers=int(cfg.experiment["workers"]))
        output.write_json(out / "estimate.json", res.to_record())
    print(output.dumps(rep["excess"]), end="")
    return 0


# -- sweep ------------------------------------------------------------------------

def _parse_axis(text: str) -> tuple[str, list[float]]:
    name, sep, values = text.partition("=")
    name = name.strip()
    if not sep or name not in cfgmod.SWEEP_KEYS:
        raise UsageError(f"--axis expects NAME=v1,v2,... with NAME in {cfgmod.SWEEP_KEYS}")
    items = [v for v in values.split(",") if v.strip()]
    try:
        return name, [float(v) for v in items]
    except ValueError:
        raise UsageError(f"--axis {name}: values must be numbers") from None


def cmd_sweep(args) -> int:
    cfg = _load(args)
    if not cfg.model.r.is_zero():
        raise UsageError("sweeps use the zero-rate value functions; set model.r = 0.0")
    axes = dict(cfg.sweep)
    for text in args.axis or []:
        name, values = _parse_axis(text)
        axes[name] = values
    if not axes:
        raise UsageError("no sweep axes: set sweep.<axis> in the config or pass --axis")
    for name, values in axes.items():
        if not values:
            raise UsageError(f"sweep axis {name!r} is empty")
    try:
        rows = verify.sweep_rows(cfg.model, axes)
    except ParameterError as exc:
        raise UsageError(f"sweep point rejected: {exc}") from None
    out = _outdir(cfg)
    if "csv" in cfg.output["formats"]:
        header = list(rows[0])
        output.write_csv(out / "sweep.csv", header, ([r[h] for h in header] for r in rows))
    if "json" in cfg.output["formats"]:
        output.write_json(out / "sweep.json", rows)
    log.info("wrote %d sweep rows to %s", len(rows), out)
    return 0


# -- verify -----------------------------------------------------------------------

def cmd_verify(args) -> int:
    cfg = _load(args)
    scale = verify.Scale(n_paths=args.paths, n_steps=args.steps,
                         seed=int(cfg.experiment["seed"]),
                         workers=int(cfg.experiment["workers"]))
    only = None
    if args.only:
        only = {int(c) for c in args.only.split(",")}
    results = verify.run_all(scale, only=only)
    rep = verify.report(results, scale)
    out = _outdir(cfg)
    output.write_json(out / "verify_report.json", rep)
    for r in results:
        print(f"criterion {r.criterion:2d} {r.name:28s} {r.status.upper()}")
    return 0 if rep["summary"]["all_pass"] else 1


# -- entry point ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="dotted-key config file (default: built-in market)")
    common.add_argument("--seed", type=int, help="override experiment.seed")
    common.add_argument("--out", help="output directory (overrides output.dir)")
    common.add_argument("--paths", type=int, help="number of paths")
    common.add_argument("--steps", type=int, help="number of time steps")

    parser = argparse.ArgumentParser(prog="fads", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", parents=[common], help="write market, filter and wealth paths")
    p.set_defaults(func=cmd_simulate)
    p = sub.add_parser("value", parents=[common], help="closed-form value functions")
    p.add_argument("--mc", action="store_true", help="also run the configured Monte Carlo estimate")
    p.set_defaults(func=cmd_value)
    p = sub.add_parser("sweep", parents=[common], help="value functions over parameter axes")
    p.add_argument("--axis", action="append", metavar="NAME=V1,V2",
                   help="sweep axis (lambda, p, gamma, T); repeatable")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("FADS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"fads: error: {exc}", file=sys.stderr)
        return 2
    except WealthOverflowError as exc:
        print(f"fads: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
