"""Reproducible random streams.

Every stochastic operation in the package takes an explicit ``RngStream``.
A stream is identified by ``(seed, stream_id)``; the same pair always
reproduces the same variate sequence, and distinct pairs give statistically
independent PCG64 streams.  Streams can be split hierarchically, which is
how ensemble drivers hand one independent stream to each replicate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RngStream:
    """Splittable handle for a deterministic random stream."""

    seed: int
    stream_id: int = 0
    _subkey: tuple[int, ...] = field(default=(), repr=False)

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self._subkey))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, *key: int) -> "RngStream":
        """Derived independent stream; used for replicate fan-out."""
        return RngStream(self.seed, self.stream_id, self._subkey + key)
