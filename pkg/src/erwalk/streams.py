"""Reproducible per-replicate random number streams.

Every replicate of an ensemble gets its own counter-based stream keyed by
(master_seed, replicate_index), so results are bit-identical no matter how
replicates are batched or distributed over workers.
"""

from __future__ import annotations

import numpy as np

__all__ = ["replicate_stream", "replicate_streams"]

_MASK64 = (1 << 64) - 1


def replicate_stream(master_seed: int, index: int) -> np.random.Generator:
    """Independent Generator for one replicate, keyed by (master_seed, index)."""
    if master_seed < 0 or index < 0:
        raise ValueError("master_seed and index must be nonnegative")
    key = np.array([master_seed & _MASK64, index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def replicate_streams(master_seed: int, start: int, count: int) -> list[np.random.Generator]:
    """Streams for replicates start, ..., start + count - 1."""
    return [replicate_stream(master_seed, start + j) for j in range(count)]
