import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fads.model import CoefficientCurve, ModelParams, ParameterError, TimeGrid, integrate, validate_params

from conftest import make_params


def test_integrate_constant():
    assert integrate(CoefficientCurve.constant(0.16), 0.0, 1.0) == pytest.approx(0.16, abs=1e-15)


def test_integrate_sharpe_squared():
    mu, sig = CoefficientCurve.constant(0.08), CoefficientCurve.constant(0.2)
    assert integrate((mu / sig) ** 2, 0.0, 1.0) == pytest.approx(0.16, rel=1e-14)


def test_integrate_piecewise_variance():
    sig = CoefficientCurve.piecewise([(0.0, 0.2), (0.5, 0.3)])
    assert integrate(sig * sig, 0.0, 1.0) == pytest.approx(0.065, rel=1e-14)


def test_integrate_partial_window():
    c = CoefficientCurve.piecewise([(0.0, 1.0), (0.5, 3.0)])
    assert integrate(c, 0.25, 0.75) == pytest.approx(0.25 * 1 + 0.25 * 3)
    assert integrate(2.0, 0.0, 3.0) == 6.0


def test_curve_division_by_zero_segment():
    with pytest.raises(ZeroDivisionError):
        CoefficientCurve.constant(1.0) / CoefficientCurve.piecewise([(0.0, 1.0), (0.5, 0.0)])


def test_curve_evaluation_and_breakpoints():
    c = CoefficientCurve.piecewise([(0.0, 1.0), (0.5, 2.0)])
    assert c(0.0) == 1.0 and c(0.49) == 1.0 and c(0.5) == 2.0 and c(0.9) == 2.0
    np.testing.assert_array_equal(c(np.array([0.1, 0.6])), [1.0, 2.0])
    assert (c + c).kind == "piecewise-constant" and CoefficientCurve.coerce(0.3).kind == "constant"


segments = st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=6)


@settings(max_examples=60, deadline=None)
@given(segments, st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_integrate_is_additive(vals, a, b, c):
    starts = [i / len(vals) for i in range(len(vals))]
    curve = CoefficientCurve(tuple(starts), tuple(vals))
    t0, t1, t2 = sorted((a, b, c))
    whole = integrate(curve, t0, t2)
    assert whole == pytest.approx(integrate(curve, t0, t1) + integrate(curve, t1, t2), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(segments, st.floats(0, 1), st.floats(0, 1))
def test_integral_of_square_nonnegative(vals, a, b):
    starts = [i / len(vals) for i in range(len(vals))]
    curve = CoefficientCurve(tuple(starts), tuple(vals))
    assert integrate(curve**2, min(a, b), max(a, b)) >= 0.0


@given(st.floats(0, 1))
def test_p_q_on_unit_circle(p):
    prm = make_params(p=p)
    assert p * p + prm.q**2 == pytest.approx(1.0, abs=1e-15)


def test_valid_params_accepted():
    prm = make_params(p=0.5)
    assert validate_params(prm) is prm


@pytest.mark.parametrize("kw, field, msg", [
    (dict(lam=0.0), "lambda", "lambda must be strictly positive"),
    (dict(sigma=[[0.0, 0.2], [0.5, 0.0]]), "sigma", "volatility must be strictly positive"),
    (dict(p=1.2), "p", "p must lie in [0, 1]"),
    (dict(gamma=1.0), "gamma", "gamma must be strictly less than 1"),
    (dict(T=0.0), "T", "horizon"),
    (dict(x0=-1.0), "x0", "initial wealth"),
    (dict(s0=0.0), "s0", "initial stock price"),
    (dict(mu=[[0.0, 0.1], [1.0, 0.2]]), "mu", "at or after T"),
])
def test_invalid_params_name_the_field(kw, field, msg):
    with pytest.raises(ParameterError) as info:
        validate_params(make_params(**kw))
    assert info.value.field == field
    assert msg in str(info.value)


def test_negative_mu_is_allowed():
    validate_params(make_params(mu=-0.05))


def test_grid():
    g = TimeGrid(4, 2.0)
    np.testing.assert_allclose(g.times, [0, 0.5, 1.0, 1.5, 2.0])
    assert g.dt == 0.5 and g.times[-1] == 2.0
    assert g.index_of(1.5) == 3
    with pytest.raises(ValueError):
        g.index_of(0.7)
    with pytest.raises(ValueError):
        TimeGrid(0, 1.0)


def test_replace_keeps_type():
    prm = make_params().replace(p=0.3)
    assert isinstance(prm, ModelParams) and prm.q == pytest.approx(math.sqrt(0.91))
