"""Seeded random streams.

Every random draw in the package comes from a Philox generator (a 64-bit
counter-based bit generator) keyed by a :class:`numpy.random.SeedSequence`.
A stream is identified by a base seed plus a tuple of integer keys (cell
index, trial index, ...), so independent trials can be generated in any
order, or concurrently, and still reproduce bit-for-bit.
"""

import numpy as np


def make_rng(seed, *keys):
    """Return a Philox ``Generator`` for the stream ``(seed, *keys)``."""
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(seed, *keys):
    """Hash ``(seed, *keys)`` into a single 64-bit integer seed."""
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    lo, hi = seq.generate_state(2, dtype=np.uint32)
    return int(hi) << 32 | int(lo)
