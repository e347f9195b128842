"""Per-path random streams.

Every simulated path owns one logical stream, derived from the pair
``(seed, path_index)`` through numpy's ``SeedSequence`` spawn keys. A path's
noise therefore never depends on which worker generates it or in what order,
so serial and parallel runs produce the same numbers.
"""

from __future__ import annotations

import numpy as np

SEED_MASK = (1 << 64) - 1


def path_stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for path ``index`` of the experiment ``seed``."""
    if index < 0:
        raise ValueError("path index must be non-negative")
    ss = np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(ss))


def path_normals(seed: int, start: int, stop: int, n_steps: int, n_factors: int = 2) -> np.ndarray:
    """Standard normals for paths ``start..stop-1``, shape ``(m, n_steps, n_factors)``."""
    out = np.empty((stop - start, n_steps, n_factors))
    for row, idx in enumerate(range(start, stop)):
        path_stream(seed, idx).standard_normal((n_steps, n_factors), out=out[row])
    return out
