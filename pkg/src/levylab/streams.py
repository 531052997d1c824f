"""Counter-based RNG streams.

Every stochastic routine in levylab draws from a Philox generator keyed by a
master seed plus an integer path (sample index, stratum index, ...).  Streams
are therefore independent of execution order and worker count: sample i of an
ensemble is the same bit pattern whether it is produced by worker 0 of 1 or
worker 3 of 8.
"""

from __future__ import annotations

import numpy as np


def substream(master_seed: int, *path: int) -> np.random.Generator:
    """Return the generator for a given (master seed, index path).

    The same arguments always yield an identical stream; distinct paths yield
    statistically independent streams (SeedSequence hashing).  The path length
    is folded into the entropy because SeedSequence pads short entropy lists
    with zeros, which would alias (i,) with (i, 0).
    """
    if master_seed < 0 or any(p < 0 for p in path):
        raise ValueError("seed and path entries must be non-negative")
    ss = np.random.SeedSequence(
        entropy=[int(master_seed), len(path), *map(int, path)])
    return np.random.Generator(np.random.Philox(ss))
