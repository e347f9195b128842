"""Parameter types, validation and exact integration over coefficient curves.

Market coefficients r(t), mu(t), sigma(t) are deterministic and restricted to
constant or piecewise-constant curves, so every integral the valuation code
needs is a finite sum over segments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class ParameterError(ValueError):
    """A model parameter violates its invariant.

    ``field`` names the offending parameter (config-level name, e.g.
    ``"lambda"``).
    """

    def __init__(self, field: str, message: str):
        super().__init__(message)
        self.field = field


@dataclass(frozen=True)
class CoefficientCurve:
    """Piecewise-constant curve on [0, T].

    Segment ``k`` starts at ``starts[k]`` and runs up to ``starts[k + 1]``;
    the last segment extends to the horizon (and beyond, for evaluation).
    Curves combine with ``+ - * /`` and ``**`` into new curves over the
    union of breakpoints, which keeps integration exact.
    """

    starts: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.starts) == 0 or len(self.starts) != len(self.values):
            raise ValueError("curve needs one value per segment start")
        if self.starts[0] != 0.0:
            raise ValueError("first segment must start at t=0")
        if any(b <= a for a, b in zip(self.starts, self.starts[1:])):
            raise ValueError("segment starts must be strictly increasing")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("curve values must be finite")

    @classmethod
    def constant(cls, value: float) -> "CoefficientCurve":
        return cls((0.0,), (float(value),))

    @classmethod
    def piecewise(cls, segments: Iterable[Sequence[float]]) -> "CoefficientCurve":
        """Build from ``[(t_start, value), ...]`` pairs."""
        segs = [(float(t), float(v)) for t, v in segments]
        return cls(tuple(t for t, _ in segs), tuple(v for _, v in segs))

    @classmethod
    def coerce(cls, obj) -> "CoefficientCurve":
        if isinstance(obj, CoefficientCurve):
            return obj
        if isinstance(obj, (int, float)):
            return cls.constant(obj)
        return cls.piecewise(obj)

    @property
    def kind(self) -> str:
        return "constant" if len(self.starts) == 1 else "piecewise-constant"

    @property
    def segments(self) -> list[tuple[float, float]]:
        return list(zip(self.starts, self.values))

    def __call__(self, t):
        idx = np.searchsorted(self.starts, t, side="right") - 1
        vals = np.asarray(self.values)[np.maximum(idx, 0)]
        return float(vals) if np.ndim(vals) == 0 else vals

    def min(self, horizon: float | None = None) -> float:
        vals = [v for s, v in self.segments if horizon is None or s < horizon]
        return min(vals)

    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.values)

    # -- algebra ---------------------------------------------------------

    def _combine(self, other, op) -> "CoefficientCurve":
        other = CoefficientCurve.coerce(other)
        starts = sorted(set(self.starts) | set(other.starts))
        values = [op(self(s), other(s)) for s in starts]
        return CoefficientCurve(tuple(starts), tuple(float(v) for v in values))

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return CoefficientCurve.coerce(other) - self

    def __mul__(self, other):
        return self._combine(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        def div(a, b):
            if b == 0.0:
                raise ZeroDivisionError("division by a curve segment equal to zero")
            return a / b

        return self._combine(other, div)

    def __rtruediv__(self, other):
        return CoefficientCurve.coerce(other) / self

    def __neg__(self):
        return CoefficientCurve(self.starts, tuple(-v for v in self.values))

    def __pow__(self, k):
        return CoefficientCurve(self.starts, tuple(float(v**k) for v in self.values))


def integrate(curve: CoefficientCurve | float, t0: float, t1: float) -> float:
    """Exact integral of a piecewise-constant curve over [t0, t1]."""
    if t1 < t0:
        raise ValueError(f"integration bounds reversed: t0={t0} > t1={t1}")
    if t0 < 0:
        raise ValueError("integration must start at t >= 0")
    curve = CoefficientCurve.coerce(curve)
    ends = curve.starts[1:] + (math.inf,)
    total = 0.0
    for start, end, value in zip(curve.starts, ends, curve.values):
        lo, hi = max(start, t0), min(end, t1)
        if hi > lo:
            total += value * (hi - lo)
    return total


@dataclass(frozen=True)
class ModelParams:
    """Full model parameterization.

    ``q`` is derived from ``p`` and never stored.
    """

    r: CoefficientCurve
    mu: CoefficientCurve
    sigma: CoefficientCurve
    lam: float
    p: float
    gamma: float
    T: float
    s0: float = 1.0
    x0: float = 1.0

    def __post_init__(self):
        for name in ("r", "mu", "sigma"):
            object.__setattr__(self, name, CoefficientCurve.coerce(getattr(self, name)))
        for name in ("lam", "p", "gamma", "T", "s0", "x0"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def q(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.p * self.p))

    def replace(self, **changes) -> "ModelParams":
        from dataclasses import replace

        return replace(self, **changes)


def validate_params(raw: ModelParams) -> ModelParams:
    """Return ``raw`` unchanged if every invariant holds.

    Raises :class:`ParameterError` for the first violation found.
    """
    scalars = {"lambda": raw.lam, "p": raw.p, "gamma": raw.gamma, "T": raw.T,
               "s0": raw.s0, "x0": raw.x0}
    for name, value in scalars.items():
        if not math.isfinite(value):
            raise ParameterError(name, f"{name} must be finite")
    if raw.lam <= 0:
        raise ParameterError("lambda", "lambda must be strictly positive")
    if not 0.0 <= raw.p <= 1.0:
        raise ParameterError("p", "p must lie in [0, 1]")
    if raw.gamma >= 1.0:
        raise ParameterError("gamma", "gamma must be strictly less than 1")
    if raw.T <= 0:
        raise ParameterError("T", "horizon T must be strictly positive")
    if raw.s0 <= 0:
        raise ParameterError("s0", "initial stock price s0 must be strictly positive")
    if raw.x0 <= 0:
        raise ParameterError("x0", "initial wealth x0 must be strictly positive")
    for name in ("r", "mu", "sigma"):
        curve = getattr(raw, name)
        if any(s >= raw.T for s in curve.starts[1:]):
            raise ParameterError(name, f"{name} curve has a segment starting at or after T")
    if raw.sigma.min(raw.T) <= 0:
        raise ParameterError("sigma", "volatility must be strictly positive")
    return raw


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``0 = t_0 < ... < t_n = T``."""

    n_steps: int
    T: float
    times: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError("n_steps must be an integer >= 1")
        if not self.T > 0:
            raise ValueError("T must be strictly positive")
        object.__setattr__(self, "n_steps", int(self.n_steps))
        times = np.arange(self.n_steps + 1) * (self.T / self.n_steps)
        times[-1] = self.T
        times.flags.writeable = False
        object.__setattr__(self, "times", times)

    @property
    def dt(self) -> float:
        return self.T / self.n_steps

    def index_of(self, t: float) -> int:
        """Grid index of time ``t``; ``t`` must sit on the grid."""
        k = int(round(t / self.dt))
        if not 0 <= k <= self.n_steps or abs(k * self.dt - t) > 1e-9 * max(1.0, self.T):
            raise ValueError(f"t={t} is not a point of the grid")
        return k
