"""Flat dotted-key configuration files.

One ``section.key = value`` assignment per line, ``#`` starts a comment.
Values are Python literals (numbers, quoted strings, lists); anything that is
not a literal is taken as a bare string, so ``experiment.investor = informed``
works. Piecewise curves are lists of ``[t_start, value]`` pairs::

    model.lambda = 1.0
    model.sigma = [[0.0, 0.2], [0.5, 0.3]]
    experiment.n_paths = 100000
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from pathlib import Path

from .model import CoefficientCurve, ModelParams, ParameterError, validate_params
from .montecarlo import Estimand, ExperimentSpec, Rule


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


MODEL_REQUIRED = ("lambda", "p", "mu", "sigma", "T")
MODEL_DEFAULTS = {"r": 0.0, "gamma": 0.0, "s0": 1.0, "x0": 1.0}
MODEL_KEYS = ("r", "mu", "sigma", "lambda", "p", "gamma", "T", "s0", "x0")
EXPERIMENT_DEFAULTS = {
    "n_paths": 1,
    "n_steps": 100,
    "seed": 0,
    "investor": "informed",
    "rule": "optimal",
    "estimand": "expected_log_utility",
    "workers": 1,
}
OUTPUT_DEFAULTS = {"dir": "out", "formats": ["csv", "json"]}
SWEEP_KEYS = ("lambda", "p", "gamma", "T")


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    experiment: dict = field(default_factory=lambda: dict(EXPERIMENT_DEFAULTS))
    output: dict = field(default_factory=lambda: dict(OUTPUT_DEFAULTS))
    sweep: dict = field(default_factory=dict)

    def experiment_spec(self, n_paths: int | None = None) -> ExperimentSpec:
        e = self.experiment
        return ExperimentSpec(
            self.model,
            n_paths=max(2, int(e["n_paths"] if n_paths is None else n_paths)),
            n_steps=int(e["n_steps"]),
            seed=int(e["seed"]),
            investor=e["investor"],
            rule=Rule.parse(e["rule"]),
            estimand=Estimand.parse(e["estimand"]),
        )


def _literal(text: str):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def parse_text(text: str) -> dict[str, object]:
    """Raw ``{dotted_key: value}`` mapping from config text."""
    raw: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}", "expected 'key = value'")
        if "." not in key:
            raise ConfigError(key, "keys must be dotted, e.g. model.lambda")
        raw[key] = _literal(value.strip())
    return raw


def _curve(key: str, value) -> CoefficientCurve:
    try:
        return CoefficientCurve.coerce(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(key, f"not a curve ({exc})") from None


def _number(key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    return float(value)


def from_mapping(raw: dict[str, object]) -> RunConfig:
    sections: dict[str, dict] = {"model": {}, "experiment": {}, "output": {}, "sweep": {}}
    for key, value in raw.items():
        section, _, name = key.partition(".")
        if section not in sections:
            raise ConfigError(key, f"unknown section {section!r}")
        sections[section][name] = value

    m = sections["model"]
    for name in m:
        if name not in MODEL_KEYS:
            raise ConfigError(f"model.{name}", "unknown model key")
    for name in MODEL_REQUIRED:
        if name not in m:
            raise ConfigError(f"model.{name}", "missing required key")
    m = {**MODEL_DEFAULTS, **m}
    try:
        params = validate_params(ModelParams(
            r=_curve("model.r", m["r"]),
            mu=_curve("model.mu", m["mu"]),
            sigma=_curve("model.sigma", m["sigma"]),
            lam=_number("model.lambda", m["lambda"]),
            p=_number("model.p", m["p"]),
            gamma=_number("model.gamma", m["gamma"]),
            T=_number("model.T", m["T"]),
            s0=_number("model.s0", m["s0"]),
            x0=_number("model.x0", m["x0"]),
        ))
    except ParameterError as exc:
        raise ConfigError(f"model.{exc.field}", str(exc)) from None

    e = sections["experiment"]
    for name in e:
        if name not in EXPERIMENT_DEFAULTS:
            raise ConfigError(f"experiment.{name}", "unknown experiment key")
    e = {**EXPERIMENT_DEFAULTS, **e}
    for name in ("n_paths", "n_steps", "seed", "workers"):
        if isinstance(e[name], bool) or not isinstance(e[name], int):
            raise ConfigError(f"experiment.{name}", "expected an integer")
    for name in ("investor", "rule", "estimand"):
        e[name] = str(e[name])
    for name, parse in (("rule", Rule.parse), ("estimand", Estimand.parse)):
        try:
            parse(e[name])
        except ValueError as exc:
            raise ConfigError(f"experiment.{name}", str(exc)) from None

    o = sections["output"]
    for name in o:
        if name not in OUTPUT_DEFAULTS:
            raise ConfigError(f"output.{name}", "unknown output key")
    o = {**OUTPUT_DEFAULTS, **o}
    o["dir"] = str(o["dir"])
    fmts = o["formats"]
    if isinstance(fmts, str):
        fmts = [fmts]
    if not set(fmts) <= {"csv", "json"}:
        raise ConfigError("output.formats", "formats must be a subset of {csv, json}")
    o["formats"] = [f for f in ("csv", "json") if f in fmts]

    s = {}
    for name, value in sections["sweep"].items():
        if name not in SWEEP_KEYS:
            raise ConfigError(f"sweep.{name}", "unknown sweep axis")
        values = value if isinstance(value, list) else [value]
        s[name] = [_number(f"sweep.{name}", v) for v in values]
    return RunConfig(params, e, o, s)


def parse(text: str) -> RunConfig:
    return from_mapping(parse_text(text))


def load(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config ({exc.strerror})") from None
    return parse(text)


def _format(value) -> str:
    if isinstance(value, CoefficientCurve):
        if value.kind == "constant":
            return repr(value.values[0])
        return repr([[s, v] for s, v in value.segments])
    if isinstance(value, str):
        return value
    return repr(value)


def serialize(cfg: RunConfig) -> str:
    """Config text that parses back to an equal :class:`RunConfig`."""
    m = cfg.model
    model = {"r": m.r, "mu": m.mu, "sigma": m.sigma, "lambda": m.lam, "p": m.p,
             "gamma": m.gamma, "T": m.T, "s0": m.s0, "x0": m.x0}
    lines = [f"model.{k} = {_format(v)}" for k, v in model.items()]
    lines += [f"experiment.{k} = {_format(cfg.experiment[k])}" for k in EXPERIMENT_DEFAULTS]
    lines += [f"output.dir = {cfg.output['dir']!r}",
              f"output.formats = {cfg.output['formats']!r}"]
    lines += [f"sweep.{k} = {cfg.sweep[k]!r}" for k in SWEEP_KEYS if k in cfg.sweep]
    return "\n".join(lines) + "\n"


DEFAULT_CONFIG_TEXT = """\
# market used by the acceptance checks
model.r = 0.0
model.mu = 0.08
model.sigma = 0.2
model.lambda = 1.0
model.p = 0.6
model.gamma = 0.0
model.T = 1.0
model.s0 = 1.0
model.x0 = 1.0
experiment.n_paths = 100000
experiment.n_steps = 1000
experiment.seed = 20240501
experiment.investor = informed
experiment.rule = optimal
experiment.estimand = expected_log_utility
experiment.workers = 1
output.dir = 'out'
output.formats = ['csv', 'json']
"""


def default_config() -> RunConfig:
    return parse(DEFAULT_CONFIG_TEXT)
