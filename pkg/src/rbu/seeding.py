"""Deterministic seed derivation for independent random streams.

Work units (dataset x method x classifier x fold, pipeline stages, grid
points) each get a stream derived from the master seed and their identity,
so results do not depend on execution order or scheduling.
"""

from __future__ import annotations

import hashlib


def derive_seed(*parts) -> int:
    """Collapse the master seed and a unit identity into a 63-bit seed."""
    digest = hashlib.sha256("\x1f".join(repr(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1
