"""
Named random streams derived from one 64-bit seed
"""

import hashlib

import numpy as np


def _label_key(label: str) -> int:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def derive_seed_sequence(seed: int, label: str, *indices: int) -> np.random.SeedSequence:
    """
    Build the seed sequence for one component stream

    Args:
        seed (int): Run seed
        label (str): Component label, e.g. "proto.trial" or "gf2code.rlc"
        *indices (int): Further keys such as the trial index

    Returns:
        np.random.SeedSequence: Independent substream
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, _label_key(label), *[int(i) for i in indices]]
    return np.random.SeedSequence(entropy)


def derive_rng(seed: int, label: str, *indices: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed_sequence(seed, label, *indices))
