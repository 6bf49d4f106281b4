"""Reproducible random streams.

Every stream is a Philox counter-based generator keyed by
``(master_seed, stream_index, *path)`` through numpy's ``SeedSequence`` spawn keys,
so trial ``k`` of sweep point ``p`` draws the same numbers whichever worker runs it.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr

MAX_SEED = 2**64 - 1


class SeededStream(BaseModel):
    """A named, independently seeded random stream."""

    model_config = ConfigDict(frozen=True)

    master_seed: int = Field(..., ge=0, le=MAX_SEED)
    stream_index: int = Field(default=0, ge=0)
    path: Tuple[int, ...] = Field(default=(), description="Child indices below the stream")

    _generator: np.random.Generator | None = PrivateAttr(default=None)

    @property
    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=(self.stream_index, *self.path)
        )

    @property
    def generator(self) -> np.random.Generator:
        """The generator for this stream; repeated access continues the same sequence."""
        if self._generator is None:
            self._generator = np.random.Generator(np.random.Philox(self.seed_sequence))
        return self._generator

    def spawn(self, index: int) -> SeededStream:
        """Derive a child stream that is independent of this one and of its siblings."""
        if index < 0:
            raise ValueError("child index must be non-negative")
        return SeededStream(
            master_seed=self.master_seed,
            stream_index=self.stream_index,
            path=(*self.path, index),
        )

    def fresh(self) -> SeededStream:
        """A new stream with the same key, restarted from its first draw."""
        return SeededStream(
            master_seed=self.master_seed, stream_index=self.stream_index, path=self.path
        )
