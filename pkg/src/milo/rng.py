"""Deterministic random streams.

Every stochastic step in the pipeline draws from an (seed, stream id)
pair. Stream ids are derived with a splitmix64-style mix of small
integer fields, so distinct (purpose, subset, class) tuples land on
distinct streams with overwhelming probability and the whole schedule
is a pure function of (dataset bytes, config). Reproducibility is
bit-exact within one build of this package, not across languages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RngStream", "derive_stream", "STREAM_SGE", "STREAM_WRE"]

_MASK64 = (1 << 64) - 1

# Domain tags keep SGE selection streams and WRE draw streams apart.
STREAM_SGE = 0x53474531
STREAM_WRE = 0x57524531


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_stream(*parts: int) -> int:
    """Mix integer fields into one 64-bit stream id."""
    acc = 0
    for part in parts:
        acc = _splitmix64(acc ^ _splitmix64(part & _MASK64))
    return acc


@dataclass(frozen=True)
class RngStream:
    """One addressable random stream: (seed, stream id)."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        seq = np.random.SeedSequence((self.seed & _MASK64, self.stream & _MASK64))
        return np.random.Generator(np.random.PCG64(seq))
