"""Named random substreams derived from a single master seed.

Every source of randomness in the pipeline (bound sets, objective
directions, Monte-Carlo sampling) draws from its own named stream, so
enlarging one stream never perturbs the others.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

__all__ = ["substream_seed", "substream"]


def substream_seed(master_seed: int, label: str) -> int:
    """Derive a 64-bit stream seed from ``(master_seed, label)``.

    Stable across platforms and Python versions (sha256-based, not
    ``hash()``).
    """
    payload = struct.pack("<q", master_seed) + b"/" + label.encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "little")


def substream(master_seed: int, label: str) -> np.random.Generator:
    """A ``numpy`` generator for the named substream."""
    return np.random.default_rng(substream_seed(master_seed, label))
