"""Seeded random streams.

Every random draw in the package goes through :func:`make_rng`, which wraps
numpy's Philox4x64-10 counter-based bit generator. Philox is a published,
platform-independent algorithm (Salmon et al., "Parallel random numbers: as
easy as 1, 2, 3"), so a stream is fully determined by its integer seed.
Uniform doubles come from the top 53 bits of each 64-bit output.
"""

import hashlib

import numpy as np


def make_rng(seed):
    if seed is None:
        raise ValueError("an explicit integer seed is required")
    return np.random.Generator(np.random.Philox(int(seed)))


def derive_seed(seed, *labels):
    """Child seed for a named sub-stream (fold, repeat, ...)."""
    text = ":".join([str(int(seed))] + [str(x) for x in labels])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little")
