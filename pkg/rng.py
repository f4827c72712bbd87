"""Seed derivation for reproducible runs.

Every random stream in a run descends from one master seed. A component's
seed is drawn from ``SeedSequence(master, spawn_key=(crc32(label), ...))``,
so the value for a given (master, labels) pair never depends on the order
in which components ask for it, nor on which thread asks.
"""

import zlib

import numpy as np

MAX_SEED = 2**63 - 1


def _label_key(label: str | int) -> int:
    if isinstance(label, int):
        return label
    return zlib.crc32(label.encode("utf-8"))


def derive_seed(master: int, *labels: str | int) -> int:
    """Return a 63-bit seed for the sub-stream named by ``labels``."""
    if master < 0:
        raise ValueError(f"seed must be non-negative, got {master}")
    seq = np.random.SeedSequence(master, spawn_key=tuple(_label_key(label) for label in labels))
    return int(seq.generate_state(1, dtype=np.uint64)[0] & MAX_SEED)


def make_generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))
