"""Deterministic derivation of named random substreams.

Every piece of randomness in this package flows from one master seed. Any
component that needs its own stream derives it from the seed plus a scope,
e.g. substream(seed, "lbei", d1, d2). Streams for different scopes are
independent, and the mapping does not depend on creation order, so work can
be rescheduled or parallelized without changing results.
"""

from __future__ import annotations

import hashlib

import numpy as np

DEFAULT_SEED = 1729


def _encode(part) -> int:
    if isinstance(part, (int, np.integer)) and not isinstance(part, bool):
        v = int(part)
        if v < 0:
            raise ValueError(f"substream scope integers must be nonnegative, got {v}")
        return v
    if isinstance(part, str):
        digest = hashlib.sha256(part.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little")
    raise TypeError(f"substream scope parts must be str or int, got {type(part).__name__}")


def substream(seed: int, *scope) -> np.random.Generator:
    """Generator for the stream named by (seed, *scope)."""
    if int(seed) < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    entropy = [int(seed)] + [_encode(p) for p in scope]
    return np.random.default_rng(np.random.SeedSequence(entropy))
