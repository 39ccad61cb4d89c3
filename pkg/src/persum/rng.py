"""Seeded random generators shared by every randomized operation.

The whole pipeline draws from numpy's PCG64 bit generator. PCG64 is a named
64-bit algorithm with a platform-independent stream, so any operation that
takes a seed is reproducible bit-for-bit across machines and Python versions.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Return the canonical seeded generator (PCG64) used across the package."""
    return np.random.Generator(np.random.PCG64(seed))
