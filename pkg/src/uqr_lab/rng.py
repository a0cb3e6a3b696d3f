"""Seeded, splittable random streams.

All randomness in the package flows through counter-based Philox generators
derived from a single 64-bit seed.  Streams are split by *name* rather than
by spawn order, so independent tasks (workers, per-sample trees, per-center
scans) get reproducible substreams no matter in which order they are created.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["make_rng"]


def _label_key(label) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label) & 0xFFFFFFFF
    return zlib.crc32(str(label).encode("utf-8"))


def make_rng(seed: int, *labels) -> np.random.Generator:
    """Philox generator for ``seed``, optionally scoped by a label path.

    ``make_rng(seed, "entropy", eps_index)`` always yields the same stream,
    independent of any other stream created from the same seed.
    """
    key = tuple(_label_key(l) for l in labels)
    ss = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))
