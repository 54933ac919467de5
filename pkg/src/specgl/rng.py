"""Seeded random streams.

All randomness goes through numpy's Philox generator, a counter-based
bit generator whose output is fixed for a given 64-bit key, so runs
replicate bit-exactly across platforms.

Sub-seeds are derived with :func:`mix_seed`: the parent seed is combined
with each index by ``seed ^ (index * GOLDEN)`` followed by the splitmix64
finalizer, where ``GOLDEN = 0x9E3779B97F4A7C15`` (an odd constant).
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def _splitmix_finalize(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return z ^ (z >> 31)


def mix_seed(seed: int, *indices: int) -> int:
    """Derive an independent 64-bit sub-seed from ``seed`` and indices."""
    z = seed & MASK64
    for idx in indices:
        z = _splitmix_finalize(z ^ ((idx + 1) * GOLDEN & MASK64))
    return z


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & MASK64))
