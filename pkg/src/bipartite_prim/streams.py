"""Named, independent random streams derived from one master seed.

Every consumer of randomness (start vertex, skip-sampled percolation,
per-trial graph seeds, branching-process blocks) gets its own stream keyed by
``(seed, tag, *indices)``, so changing one consumer never perturbs another and
results do not depend on how trials are scheduled.
"""
import numpy as np

START_STREAM = 1
PERC_STREAM = 2
TRIAL_STREAM = 3
BP_STREAM = 4


def substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(key)))


def derive_seed(seed: int, *key: int) -> int:
    """A 64-bit seed for the stream ``(seed, *key)``."""
    state = np.random.SeedSequence(int(seed), spawn_key=tuple(key)).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def trial_seed(seed: int, trial: int) -> int:
    return derive_seed(seed, TRIAL_STREAM, trial)
