"""Adaptive Simpson quadrature for smooth scalar integrands."""

from __future__ import annotations

import math
from typing import Callable


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-9, max_depth: int = 50, min_depth: int = 5) -> float:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Standard recursive bisection with Richardson correction; the interval
    is refined until ``|S_left + S_right - S_whole| <= 15 * tol`` on each
    piece, with the tolerance halved at every level. The first
    ``min_depth`` levels are always split so that sharply peaked integrands
    (e.g. exponential kernels concentrated at one end) are not accepted on
    the strength of three coarse samples.
    """
    if b == a:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, tol, max_depth, min_depth)

    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    # explicit stack: (a, b, fa, fm, fb, whole, tol, depth)
    stack = [(a, b, fa, fm, fb, whole, tol, max_depth)]
    total = 0.0
    while stack:
        a, b, fa, fm, fb, whole, eps, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        if not math.isfinite(delta):
            raise FloatingPointError(f"integrand produced a non-finite value on [{a}, {b}]")
        if depth <= 0 or (max_depth - depth >= min_depth and abs(delta) <= 15.0 * eps):
            total += left + right + delta / 15.0
        else:
            stack.append((m, b, fm, frm, fb, right, 0.5 * eps, depth - 1))
            stack.append((a, m, fa, flm, fm, left, 0.5 * eps, depth - 1))
    return total
