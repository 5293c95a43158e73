"""Counter-based random streams keyed by (seed, tag, index).

Each stream is an independent Philox generator whose key is derived from the
triple, so a chunk of work draws the same numbers no matter which worker or
in which order it runs.
"""
from __future__ import annotations

import hashlib

import numpy as np

CHUNK = 2**16


def tag_id(tag: str) -> int:
    return int.from_bytes(hashlib.blake2b(tag.encode(), digest_size=8).digest(), "little")


def stream(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), tag_id(tag), int(index)])
    return np.random.Generator(np.random.Philox(ss))


def chunk_sizes(n: int, chunk: int = CHUNK):
    full, rest = divmod(int(n), int(chunk))
    sizes = [chunk] * full
    if rest:
        sizes.append(rest)
    return sizes
