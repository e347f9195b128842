import math

import numpy as np
import pytest

from fads.dynamics import informed_view, market_from_normals, ou_transition, simulate_market, simulate_ou
from fads.model import TimeGrid
from fads.rng import path_normals

from conftest import make_params


def test_ou_transition_coefficients():
    decay, var = ou_transition(2.0, 0.5)
    assert decay == pytest.approx(0.367879, abs=1e-6)
    assert var == pytest.approx(0.216166, abs=1e-6)


def test_zero_noise_keeps_u_at_zero():
    grid = TimeGrid(20, 1.0)
    u, b = simulate_ou(grid, 1.3, np.zeros(20))
    assert not u.any() and not b.any()


def test_ou_terminal_variance():
    lam, n = 0.5, 100_000
    grid = TimeGrid(10, 1.0)
    u, _ = simulate_ou(grid, lam, path_normals(3, 0, n, 10, 1)[..., 0])
    ut = u[:, -1]
    dev = (ut - ut.mean()) ** 2
    se = dev.std(ddof=1) / math.sqrt(n)
    assert abs(dev.mean() - (1 - math.exp(-1.0))) < 3 * se


def test_ou_one_step_conditional_moments():
    # U_{t+dt} - e^{-lam dt} U_t is independent of U_t with the transition variance
    lam, n = 1.5, 100_000
    grid = TimeGrid(4, 2.0)
    u, _ = simulate_ou(grid, lam, path_normals(5, 0, n, 4, 1)[..., 0])
    decay, var = ou_transition(lam, grid.dt)
    resid = u[:, 2] - decay * u[:, 1]
    assert abs(resid.mean()) < 3 * resid.std() / math.sqrt(n)
    assert abs(np.corrcoef(resid, u[:, 1])[0, 1]) < 3 / math.sqrt(n)
    sq = resid**2
    assert abs(sq.mean() - var) < 3 * sq.std(ddof=1) / math.sqrt(n)


def test_b_record_matches_recursion():
    grid = TimeGrid(50, 1.0)
    lam = 0.7
    u, b = simulate_ou(grid, lam, np.random.default_rng(0))
    np.testing.assert_allclose(np.diff(b), np.diff(u) + lam * u[:-1] * grid.dt, atol=1e-14)
    assert b[0] == 0 and u[0] == 0


def test_zero_noise_stock_is_deterministic_skeleton():
    prm = make_params(mu=0.1, sigma=0.3, T=2.0, s0=1.5)
    grid = TimeGrid(40, 2.0)
    path = market_from_normals(prm, grid, np.zeros((40, 2)))
    assert path.s[-1] == pytest.approx(1.5 * math.exp((0.1 - 0.045) * 2.0), rel=1e-13)


def test_p_one_is_geometric_brownian_motion():
    prm = make_params(p=1.0)
    grid = TimeGrid(30, 1.0)
    path = simulate_market(prm, grid, np.random.default_rng(1))
    np.testing.assert_array_equal(path.y, path.w)
    expected = np.exp((0.08 - 0.02) * grid.times + 0.2 * path.w)
    np.testing.assert_allclose(path.s, expected, rtol=1e-12)


def test_log_stock_mean():
    prm = make_params()
    grid = TimeGrid(20, 1.0)
    n = 100_000
    path = market_from_normals(prm, grid, path_normals(9, 0, n, 20))
    x = np.log(path.s[:, -1])
    assert abs(x.mean() - (0.08 - 0.02)) < 3 * x.std(ddof=1) / math.sqrt(n)


def test_driver_identity_and_positivity():
    prm = make_params(sigma=[[0.0, 0.2], [0.5, 0.35]], mu=[[0.0, 0.05], [0.3, 0.1]])
    grid = TimeGrid(10, 1.0)
    path = market_from_normals(prm, grid, path_normals(2, 0, 3, 10))
    np.testing.assert_allclose(np.diff(path.y), prm.p * np.diff(path.w) + prm.q * np.diff(path.u),
                               atol=1e-14)
    t = grid.times[:-1]
    dlog = (prm.mu(t) - 0.5 * prm.sigma(t) ** 2) * grid.dt + prm.sigma(t) * np.diff(path.y)
    np.testing.assert_allclose(np.diff(np.log(path.s)), dlog, atol=1e-13)
    assert (path.s > 0).all()


def test_informed_view_identities():
    prm = make_params()
    grid = TimeGrid(25, 1.0)
    path = market_from_normals(prm, grid, path_normals(4, 0, 2, 25))
    view = informed_view(path, prm)
    np.testing.assert_allclose(view.b1, prm.p * path.w + prm.q * path.b)
    np.testing.assert_allclose(view.upsilon1, -prm.q * prm.lam * path.u)
    np.testing.assert_allclose(view.mu1, 0.08 + view.upsilon1 * 0.2)


def test_informed_view_degenerate_cases():
    grid = TimeGrid(10, 1.0)
    prm = make_params()
    flat = market_from_normals(prm, grid, np.column_stack([np.ones(10), np.zeros(10)]))
    view = informed_view(flat, prm)
    assert not view.upsilon1.any()
    np.testing.assert_array_equal(view.mu1, np.full(11, 0.08))

    one = make_params(p=1.0)
    noisy = market_from_normals(one, grid, path_normals(1, 0, 1, 10)[0])
    assert not informed_view(noisy, one).upsilon1.any()
    with pytest.raises(ValueError):
        informed_view(noisy, one, TimeGrid(5, 1.0))


def test_informed_moment_at_one():
    prm = make_params()
    grid = TimeGrid(10, 1.0)
    n = 100_000
    path = market_from_normals(prm, grid, path_normals(21, 0, n, 10))
    sq = informed_view(path, prm).upsilon1[:, -1] ** 2
    target = 0.5 * 0.64 * (1 - math.exp(-2.0))
    assert abs(sq.mean() - target) < 3 * sq.std(ddof=1) / math.sqrt(n)


def test_quadratic_variation_and_independence():
    prm = make_params()
    grid = TimeGrid(10_000, 1.0)
    path = market_from_normals(prm, grid, path_normals(8, 0, 1, 10_000)[0])
    view = informed_view(path, prm)
    for series in (path.w, path.b, view.b1):
        assert abs(np.sum(np.diff(series) ** 2) - 1.0) < 0.05
    dw, db = np.diff(path.w), np.diff(path.b)
    assert abs(np.corrcoef(dw, db)[0, 1]) < 3 / math.sqrt(10_000)


def test_b1_increment_variance():
    prm = make_params()
    grid = TimeGrid(50, 1.0)
    n = 20_000
    path = market_from_normals(prm, grid, path_normals(13, 0, n, 50))
    inc = np.diff(informed_view(path, prm).b1, axis=-1)[:, 7]
    sq = inc**2
    assert abs(sq.mean() - grid.dt) < 3 * sq.std(ddof=1) / math.sqrt(n)


def test_same_seed_same_path():
    prm = make_params()
    grid = TimeGrid(100, 1.0)
    a = market_from_normals(prm, grid, path_normals(99, 0, 3, 100))
    b = market_from_normals(prm, grid, path_normals(99, 0, 3, 100))
    for f in ("w", "b", "u", "y", "s"):
        assert np.array_equal(getattr(a, f), getattr(b, f))
    assert a.path(1).y.shape == (101,)
