"""Seeded random streams.

Sequential work uses a Philox generator seeded from the run seed.  Work that
must be reproducible under extension (bi-infinite move windows) uses a
counter-keyed stream: block ``b`` in direction ``d`` gets its own Philox key,
so a block's draws never depend on how many other blocks were requested.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Independent generator for ``seed`` and an optional stream path."""
    seed = int(seed) & MASK64
    ss = np.random.SeedSequence([seed, *[int(s) & MASK64 for s in stream]])
    return np.random.Generator(np.random.Philox(ss))


def block_rng(seed: int, direction: int, block: int) -> np.random.Generator:
    """Counter-keyed generator for one block of a bi-infinite sequence."""
    key = np.array([int(seed) & MASK64, ((int(block) << 1) | (direction & 1)) & MASK64],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
