"""Named deterministic RNG streams.

Every random draw in the package flows from a single master seed through a
named sub-stream, so components (policy init, ES noise, terrain, evaluation)
can be reseeded independently and reproduced exactly regardless of execution
order or worker count.
"""

import numpy as np

# Stream tags. These values are part of the on-disk reproducibility contract:
# changing them changes every derived random sequence.
STREAM_INIT = 0
STREAM_NOISE = 1
STREAM_TERRAIN = 2
STREAM_EVAL = 3
STREAM_EVAL_CENTER = 4


def seed_sequence(master_seed, *path):
    """SeedSequence for the sub-stream identified by integer path components."""
    return np.random.SeedSequence(
        entropy=int(master_seed), spawn_key=tuple(int(p) for p in path)
    )


def stream(master_seed, *path):
    """Independent Generator for (master_seed, *path)."""
    return np.random.default_rng(seed_sequence(master_seed, *path))


def stream_seed(master_seed, *path):
    """Collapse a named stream to a single non-negative 63-bit integer seed."""
    return int(seed_sequence(master_seed, *path).generate_state(1, np.uint64)[0] >> np.uint64(1))


def uniform_open(rng, low, high, size):
    """Uniform draw guaranteed inside the open interval (low, high).

    numpy's uniform() samples the half-open [low, high); boundary hits are
    ~2^-53 events but the contract here is strict, so they are resampled.
    """
    out = rng.uniform(low, high, size)
    while True:
        mask = (out <= low) | (out >= high)
        if not mask.any():
            return out
        out[mask] = rng.uniform(low, high, int(mask.sum()))
