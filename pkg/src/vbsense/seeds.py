"""Deterministic random-stream derivation.

Every stochastic operation takes an integer seed and derives an independent
stream from (seed, path) via numpy's SeedSequence, so identical arguments
always reproduce identical draws and distinct paths never share a stream.
"""

from __future__ import annotations

import numpy as np

# Fixed salts separating the independent uses of one user-facing seed.
GRAPH_SALT = 0x67726170
SIGNAL_SALT = 0x7369676E
TRIAL_SALT = 0x7472696C
PROBE_SALT = 0x70726F62
SCREEN_SALT = 0x73637263


def derive_rng(seed, *path: int) -> np.random.Generator:
    """Generator for stream (seed, *path); bit-stable for fixed numpy.

    seed may be an int or a tuple/list of ints (a derivation path).
    """
    if isinstance(seed, (tuple, list)):
        head = [int(s) & 0xFFFFFFFFFFFFFFFF for s in seed]
    else:
        head = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    entropy = head + [int(p) & 0xFFFFFFFFFFFFFFFF for p in path]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def alpha_key(alpha: float) -> int:
    """Stable integer key for a float density factor (its IEEE-754 bits)."""
    return int(np.float64(alpha).view(np.uint64))
