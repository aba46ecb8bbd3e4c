"""Deterministic seed derivation.

Every run is driven by one 64-bit root seed.  Components derive their own
seeds through ``child_seed(root, label)`` so that each stage (corpus
synthesis, weight init, data order, ...) is independently reproducible:
re-running a single component with the same root seed gives bit-identical
results regardless of what the other components consumed.

The derivation is SHA-256 over the little-endian root seed concatenated
with the UTF-8 label, truncated to 64 bits.  It is stable across platforms
and Python versions (unlike ``hash()``).
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def child_seed(seed: int, label: str) -> int:
    """Derive a stable 64-bit child seed from (seed, label)."""
    payload = (int(seed) & _MASK64).to_bytes(8, "little") + label.encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "little")


def make_rng(seed: int, label: str | None = None) -> np.random.Generator:
    """PCG64 generator for ``seed``, optionally scoped by ``label``."""
    if label is not None:
        seed = child_seed(seed, label)
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))
