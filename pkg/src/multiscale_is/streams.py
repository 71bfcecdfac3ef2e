"""Deterministic random streams keyed by (seed, purpose, index...).

Every consumer of randomness derives its own counter-based Philox stream
from the run seed and a tuple key, so results never depend on the order in
which work is scheduled or on the number of workers.
"""

import numpy as np

FIELD = 0
PATH = 1
ENSEMBLE = 2


def make_rng(seed, *key):
    """Return an independent ``numpy.random.Generator`` for ``(seed, *key)``."""
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))
