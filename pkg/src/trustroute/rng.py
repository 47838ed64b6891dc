"""Seeded random streams.

Every random draw descends from one 64-bit master seed. A substream is a
``numpy.random.Generator`` over PCG64 seeded with
``SeedSequence(entropy=master_seed, spawn_key=(crc32(tag), *indices))``,
so the stream for e.g. ``("replicate", degree_index, replicate)`` is fixed
regardless of how work is scheduled across processes.
"""

from __future__ import annotations

import zlib

import numpy as np

MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def substream(master_seed: int, tag: str, *indices: int) -> np.random.Generator:
    key = (zlib.crc32(tag.encode("utf-8")),) + tuple(int(i) for i in indices)
    ss = np.random.SeedSequence(entropy=check_seed(master_seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))
