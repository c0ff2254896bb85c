"""Named, reproducible random substreams.

Every random component draws from its own stream derived from one root seed, so a drop, a shadowing
realisation or a single GA island can be regenerated without replaying anything else.
"""

import hashlib
from typing import Union

import numpy as np

Key = Union[int, str]


def _key_word(key: Key) -> int:
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError(f"substream keys must be non-negative, got {key}")
        return int(key)
    digest = hashlib.sha256(str(key).encode("utf-8")).digest()
    return int.from_bytes(digest[:4], byteorder="big")


def seed_sequence(seed: int, *keys: Key) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key_word(k) for k in keys))


def substream(seed: int, *keys: Key) -> np.random.Generator:
    """Return the generator for the stream named by `keys` under root `seed`.

    Example:
        >>> rng = substream(7, "ga", "generation", 3, "island", 1)
    """
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *keys)))
