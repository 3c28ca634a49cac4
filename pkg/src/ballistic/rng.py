"""Counter-based splittable random streams for reproducible Monte Carlo.

Trial i's stream is a pure function of (seed, i): parallel runs produce
byte-identical results regardless of how trials are scheduled.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial, keyed by (seed, trial)."""
    key = np.array(
        [int(seed) & _MASK64, int(trial) & _MASK64], dtype=np.uint64
    )
    return np.random.Generator(np.random.Philox(key=key))


def run_rng(seed: int) -> np.random.Generator:
    """Generator for non-trial (run-level) sampling."""
    return trial_rng(seed, _MASK64)
