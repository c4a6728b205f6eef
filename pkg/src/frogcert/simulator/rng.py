"""Counter-based random streams.

Every frog owns a stream keyed by ``(master_seed, episode, frog)``; block
``k`` of that stream is ``blake2b(key || k)``, cut into eight 53-bit
uniforms.  Nothing depends on the order in which frogs or episodes are
processed, so results do not change with the number of workers.

Vectorised Monte Carlo uses numpy's Philox (also counter-based), keyed
the same way per batch of walkers.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

_U53 = 2.0**-53
_MASK64 = (1 << 64) - 1


def _key(*parts) -> bytes:
    h = hashlib.blake2b(digest_size=32)
    for p in parts:
        if isinstance(p, bytes):
            h.update(struct.pack("<I", len(p)))
            h.update(p)
        else:
            h.update(struct.pack("<Q", int(p) & _MASK64))
    return h.digest()


def address_bytes(addr) -> bytes:
    return bytes(addr)


class FrogStream:
    """Deterministic uniform stream for one frog in one episode."""

    __slots__ = ("_key", "_block", "_buf", "_pos")

    def __init__(self, master_seed: int, episode: int, frog: bytes, tag: int = 0):
        self._key = _key(master_seed, episode, tag, frog)
        self._block = 0
        self._buf: tuple = ()
        self._pos = 8

    def _refill(self):
        digest = hashlib.blake2b(self._key + struct.pack("<Q", self._block), digest_size=64).digest()
        self._buf = struct.unpack("<8Q", digest)
        self._block += 1
        self._pos = 0

    def uniform(self) -> float:
        if self._pos == 8:
            self._refill()
        v = self._buf[self._pos]
        self._pos += 1
        return (v >> 11) * _U53

    def below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return int(self.uniform() * n)


def block_generator(master_seed: int, tag: int, block: int) -> np.random.Generator:
    """Philox generator for one fixed-size batch of vectorised walkers."""
    words = np.frombuffer(_key(master_seed, tag, block)[:16], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=words))
