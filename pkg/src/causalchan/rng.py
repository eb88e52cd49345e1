"""Counter-based random streams keyed by (master seed, role, trial).

Each stream is an independent Philox generator derived through numpy's
SeedSequence, so any trial can be replayed without generating earlier ones.
"""

from __future__ import annotations

import zlib

import numpy as np

ROLES = {
    "codebook": 0,
    "alice_secrets": 1,
    "adversary_babble": 2,
    "adversary_coins": 3,
    "message": 4,
}


def label_key(label: str | None) -> int:
    """Stable integer for a free-form stream label."""
    if not label:
        return 0
    return zlib.crc32(label.encode("utf-8"))


def stream(master_seed: int, role: str, trial: int = 0, label: str | None = None) -> np.random.Generator:
    if role not in ROLES:
        raise ValueError(f"unknown RNG role {role!r}")
    if master_seed < 0 or trial < 0:
        raise ValueError("seeds and trial indices must be nonnegative")
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(ROLES[role], int(trial), label_key(label)))
    return np.random.Generator(np.random.Philox(ss))
