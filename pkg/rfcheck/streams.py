"""
Deterministic random streams.

Every stream is a numpy Generator over the counter-based Philox bit
generator, keyed by a master seed and a tuple of integers naming the
stream. Two streams with different keys are statistically independent and
neither depends on how many other streams exist or in which order they are
consumed, so tree j of a forest draws the same numbers whether the forest
has 10 trees or 10,000 and whatever the thread count.
"""

import enum

import numpy as np

SEED_MAX = 2**64 - 1


class Stream(enum.IntEnum):
    """Top-level stream names. Values are part of the reproducibility contract."""

    FEATURES = 1
    NOISE = 2
    TREE = 3
    QUERY = 4
    REPLICATE = 5


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        from rfcheck.errors import ConfigurationError

        raise ConfigurationError(f"seed must be an unsigned 64-bit integer: {seed}")
    return seed


def make_stream(seed: int, *key: int) -> np.random.Generator:
    """
    Return the generator for stream `key` under master `seed`.
    For example, make_stream(seed, Stream.TREE, 7) is the stream of tree 7.
    """
    sequence = np.random.SeedSequence(
        entropy=check_seed(seed), spawn_key=tuple(int(k) for k in key)
    )
    return np.random.Generator(np.random.Philox(sequence))


def derive_seed(seed: int, *key: int) -> int:
    """
    Derive a child master seed from (seed, key), for handing a whole
    sub-computation (such as one experiment replicate) its own seed.
    """
    sequence = np.random.SeedSequence(
        entropy=check_seed(seed), spawn_key=tuple(int(k) for k in key)
    )
    return int(sequence.generate_state(1, dtype=np.uint64)[0])
