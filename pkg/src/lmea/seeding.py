"""Deterministic derivation of per-task seeds from one master seed."""

from __future__ import annotations

import hashlib


def derive_seed(master_seed: int, *key: object) -> int:
    """Hash (master_seed, key parts) into a stable unsigned 64-bit seed.

    Stable across platforms and processes, so concurrent benchmark tasks can
    each own an independent RNG stream without affecting results.
    """
    text = ":".join([str(int(master_seed))] + [str(part) for part in key])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
