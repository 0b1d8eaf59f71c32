"""Deterministic counter-based random streams.

A single global seed fans out to independent per-task streams keyed by a
string label.  Philox is counter-based, so a stream's output depends only on
(seed, label) and the draw positions, never on thread count or interleaving.
All consumers draw vectorized blocks from a fresh generator, which makes
results reproducible bit-for-bit for a fixed (seed, label, budget).
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = 0xFFFF_FFFF_FFFF_FFFF


def _label_key(label: str) -> int:
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def stream(seed: int, label: str) -> np.random.Generator:
    """Generator for the (seed, label) stream; same inputs, same output."""
    key = np.array([seed & _MASK64, _label_key(label)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
