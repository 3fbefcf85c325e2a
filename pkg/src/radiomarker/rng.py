"""Portable pseudo-random streams.

Every random draw in the package goes through :class:`SplitMix64`, a
counter-based generator whose output depends only on the seed and the
number of values drawn so far. The constants are those of the reference
SplitMix64 algorithm (Steele, Lea & Flood 2014)::

    z_i = seed + (i + 1) * 0x9E3779B97F4A7C15          (mod 2**64)
    z   = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z   = (z ^ (z >> 27)) * 0x94D049BB133111EB
    out = z ^ (z >> 31)

Doubles take the top 53 bits. Normals use the cosine branch of Box-Muller.
"""
from __future__ import annotations

import hashlib

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def derive_seed(*parts) -> int:
    """Hash arbitrary printable parts into a 64-bit seed.

    Used for per-fold seeds so that a fold's stream depends on case ids,
    never on row positions or scheduling.
    """
    text = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "little")


class SplitMix64:
    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self.counter = 0

    def uint64(self, n: int) -> np.ndarray:
        idx = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        z = np.uint64(self.seed) + idx * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))

    def random(self, n: int) -> np.ndarray:
        """Uniform doubles on [0, 1)."""
        return (self.uint64(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def open_uniform(self, n: int) -> np.ndarray:
        """Uniform doubles on the open interval (0, 1)."""
        return ((self.uint64(n) >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53

    def normal(self, n: int) -> np.ndarray:
        u1 = self.open_uniform(n)
        u2 = self.random(n)
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)

    def integers(self, high: int, n: int) -> np.ndarray:
        """Integers uniform on ``[0, high)``."""
        return np.minimum((self.random(n) * high).astype(np.int64), high - 1)

    def permutation(self, n: int) -> np.ndarray:
        return np.argsort(self.random(n), kind="stable")
