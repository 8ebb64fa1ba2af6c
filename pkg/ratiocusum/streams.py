#!/usr/bin/env python3
"""
Random Stream Derivation

Every replication draws from its own generator derived from a master seed
and an index path, so results do not depend on execution order or on how
replications are spread over processes.
"""

import numpy as np

from .config import RNG_NAME
from .exceptions import InvalidSpec


def check_seed(seed: int) -> int:
    """
    Master seed as a nonnegative int

    Raises:
        InvalidSpec: If seed is negative
    """
    seed = int(seed)
    if seed < 0:
        raise InvalidSpec(f"Seed must be a nonnegative integer, got {seed}")
    return seed


def stream(seed: int, *index: int) -> np.random.Generator:
    """
    Generator for sub-stream (seed, index...)

    Uses numpy's SeedSequence spawn keys with the PCG64 bit generator
    (recorded as RNG_NAME in table provenance).

    Args:
        seed: Master seed (nonnegative)
        index: Sub-stream path, e.g. (replication,) or (cell, replication)

    Returns:
        numpy Generator

    Raises:
        InvalidSpec: If seed is negative
    """
    sequence = np.random.SeedSequence(entropy=check_seed(seed), spawn_key=tuple(int(i) for i in index))
    return np.random.Generator(np.random.PCG64(sequence))


__all__ = ['check_seed', 'stream', 'RNG_NAME']
