"""Seedable, named random streams backed by a counter-based generator.

One master seed fans out into independent streams identified by a name
plus optional extra key parts ("init", "dropout", "shuffle", and
per-word "oov" keys).  Each stream key is the first 128 bits of
SHA-256("<seed>/<part>/<part>/...") used as the key of a Philox-4x64
bit generator, so a stream's output depends only on the master seed and
its name, never on how many draws other streams have made.  Changing
the batch order therefore cannot change parameter initialization, and
an out-of-vocabulary vector can be regenerated from scratch at any time
and come out bit-identical.
"""

import hashlib

import numpy as np


def stream_key(seed: int, *parts: str) -> int:
    """128-bit Philox key derived from the master seed and name parts."""
    tag = "/".join([str(int(seed))] + [str(p) for p in parts])
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    return int.from_bytes(digest[:16], "little")


def stream(seed: int, *parts: str) -> np.random.Generator:
    """Fresh generator for the named stream, starting at counter zero."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, *parts)))
