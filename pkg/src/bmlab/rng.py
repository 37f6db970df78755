"""Counter-based random streams.

Every sampler in the package takes an explicit ``RngStream``.  A stream is a
(seed, stream_id) pair fed to a Philox counter-based bit generator, so the
same pair reproduces the same draws bit for bit, independent of scheduling
or of how many other streams were consumed in between.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

__all__ = ["RngStream"]

_MASK64 = (1 << 64) - 1


def _label_hash(label: str) -> int:
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class RngStream:
    """Deterministic, splittable random stream.

    A single stream is single-consumer: call :meth:`generator` once and use
    the returned generator sequentially.  Parallel work should derive one
    child stream per task via :meth:`split` or :meth:`named`.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)
        object.__setattr__(self, "stream_id", int(self.stream_id) & _MASK64)

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def split(self, index: int) -> "RngStream":
        """Child stream for replica ``index``; stable under reordering."""
        mixed = (self.stream_id * 0x9E3779B97F4A7C15 + 2 * int(index) + 1) & _MASK64
        return RngStream(self.seed, mixed)

    def named(self, label: str) -> "RngStream":
        """Child stream keyed by an experiment label."""
        return RngStream(self.seed, (self.stream_id ^ _label_hash(label)) & _MASK64)
