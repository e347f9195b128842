"""Fused per-path simulation kernel for Monte Carlo experiments.

Mirrors ``dynamics.market_from_normals`` -> ``informed_view`` / ``run_filter``
-> ``strategy.log_wealth`` step for step, drawing its normals from the path's
own generator in the same order (W then U innovation at each step), so it
consumes exactly the numbers ``rng.path_normals`` would produce.
"""

from __future__ import annotations

import numba as nb
import numpy as np

RULE_OPTIMAL = 0
RULE_CONSTANT = 1


@nb.njit(cache=True)
def path_kernel(gen, n, dt, decay, sd, p, q, lam, informed, mu_k, sig_k, r_k, gains,
                kinds, values, gammas, log_x0, t_index, log_v, max_abs):
    """Simulate one path; fill ``log_v`` / ``max_abs`` per variant.

    Returns the drift adjustment at grid index ``t_index``.
    """
    sqdt = np.sqrt(dt)
    n_var = kinds.shape[0]
    for j in range(n_var):
        log_v[j] = log_x0
        max_abs[j] = abs(log_x0)
    u = 0.0
    v0 = 0.0
    ups_at = 0.0
    for k in range(n):
        zw = gen.standard_normal()
        zu = gen.standard_normal()
        u_next = decay * u + sd * zu
        du = u_next - u
        dw = sqdt * zw
        if informed:
            ups = -lam * q * u
            db = p * dw + q * (du + lam * u * dt)
        else:
            ups = v0
            db = (p * dw + q * du) - v0 * dt
            v0 = decay * v0 - gains[k] * db
        if k == t_index:
            ups_at = ups
        sig = sig_k[k]
        mu_i = mu_k[k] + ups * sig
        theta = (mu_i - r_k[k]) / sig
        for j in range(n_var):
            if kinds[j] == RULE_CONSTANT:
                pi = values[j]
            else:
                pi = values[j] * mu_i / ((1.0 - gammas[j]) * sig * sig)
            expo = pi * sig
            log_v[j] += (expo * theta - 0.5 * expo * expo) * dt + expo * db
            a = abs(log_v[j])
            if a > max_abs[j]:
                max_abs[j] = a
        u = u_next
    if t_index == n:
        ups_at = -lam * q * u if informed else v0
    return ups_at
