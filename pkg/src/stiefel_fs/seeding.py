"""Seed derivation.

Every random stream is derived from one user seed plus a tuple of integer
counters, hashed through ``numpy.random.SeedSequence``.  The counters used by
the pipeline are:

    (0,)          Stiefel initial point for the sweep / trace
    (1, t)        evaluation split for trial ``t`` (paired mode)
    (1, t, s)     evaluation split for trial ``t`` at subset size ``s`` (unpaired)
"""

import numpy as np

OPTIMIZER_STREAM = 0
EVAL_STREAM = 1


def derive_seed(seed: int, *counters: int) -> int:
    """Return a 63-bit child seed for ``(seed, *counters)``."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *map(int, counters)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
