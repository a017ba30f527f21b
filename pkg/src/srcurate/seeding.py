"""Stable seed derivation so every pipeline stage is reproducible.

Seeds are derived by hashing string-formatted parts with SHA-256, which
is stable across platforms and Python versions (unlike ``hash()``).
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(*parts) -> int:
    """Map an arbitrary tuple of parts to a 64-bit seed."""
    text = ":".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def spawn_rng(*parts) -> np.random.Generator:
    """A fresh generator seeded from the derived seed of ``parts``."""
    return np.random.default_rng(derive_seed(*parts))
