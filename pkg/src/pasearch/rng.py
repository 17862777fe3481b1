"""Seeding conventions.

Every random quantity in the package is drawn from a PCG64 generator keyed
by an explicit (seed, stream) pair, so reruns are reproducible regardless
of call order:

  * a trial seed is derived from (base_seed, n, trial) via a SeedSequence
    spawn key, then collapsed to a uint64 so it can be stored in file
    headers and result rows;
  * within one seed, independent draw families (sequential endpoint draws,
    block exponentials, edge left-points, handle permutation, search moves)
    each use a fixed named stream.

Two streams with different (seed, stream) keys never overlap by the
SeedSequence construction.
"""
from __future__ import annotations

import numpy as np

STREAM_SEQUENTIAL = 0
STREAM_XI = 1
STREAM_ELL = 2
STREAM_HANDLE = 3
STREAM_SEARCH = 4
STREAM_UNIFORM = 5
STREAM_ANALYSIS = 6

_UINT64_MAX = 2**64 - 1


def check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed <= _UINT64_MAX:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    return seed


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    """Generator for the given named stream of a seed."""
    seed = check_seed(seed)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))


def derive_trial_seed(base_seed: int, n: int, trial: int) -> int:
    """Per-trial uint64 seed, a pure function of (base_seed, n, trial)."""
    base_seed = check_seed(base_seed)
    ss = np.random.SeedSequence(base_seed, spawn_key=(int(n), int(trial)))
    return int(ss.generate_state(1, np.uint64)[0])
