"""
Labelled seed sub-streams derived from one root seed.
"""

import hashlib

import numpy as np


def derive_seed(root: int, label: str) -> int:
    """Stable 63-bit seed for a named stage of a run."""
    digest = hashlib.sha256(f"{root}:{label}".encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'big') & ((1 << 63) - 1)


def stage_rng(root: int, label: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(root, label))
