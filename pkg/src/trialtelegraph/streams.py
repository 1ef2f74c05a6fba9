"""Counter-based uniform streams for reproducible parallel Monte Carlo.

Draws are addressed, not sequenced: ``value(tag, i)`` is a pure function of
(seed, tag, i), implemented as element i of a Philox-4x64 stream keyed by
(seed, tag).  Any contiguous slice of a tagged stream can be generated on
its own (Philox counters advance in blocks of 4 outputs), so chunked or
multi-worker consumers see bit-identical numbers regardless of scheduling.

The path-simulation convention: draw d of path i is ``value(tag=d, i)``;
each simulated period consumes one trial draw (even tags) followed by one
duration draw (odd tags).
"""

from __future__ import annotations

import numpy as np
from numpy.random import Generator, Philox

from .errors import ParameterError

_OUTPUTS_PER_BLOCK = 4  # Philox-4x64 emits 4 uint64 words per counter step


class UniformStreams:
    """Family of uniform streams keyed by (seed, tag)."""

    def __init__(self, seed: int):
        seed = int(seed)
        if not (0 <= seed < 2**64):
            raise ParameterError(f"seed must fit in a uint64, got {seed}")
        self.seed = seed

    def slice(self, tag: int, lo: int, hi: int) -> np.ndarray:
        """Uniforms in [0, 1) at indices [lo, hi) of the tagged stream."""
        if lo < 0 or hi < lo:
            raise ParameterError(f"bad slice [{lo}, {hi})")
        if hi == lo:
            return np.empty(0)
        bitgen = Philox(key=np.array([self.seed, int(tag)], dtype=np.uint64))
        blocks, skip = divmod(lo, _OUTPUTS_PER_BLOCK)
        if blocks:
            bitgen.advance(blocks)
        return Generator(bitgen).random(skip + (hi - lo))[skip:]

    def value(self, tag: int, index: int) -> float:
        return float(self.slice(tag, index, index + 1)[0])


class PathStream:
    """Sequential view of one path's draws: call d returns value(tag=d, i)."""

    def __init__(self, seed: int, path_index: int):
        if path_index < 0:
            raise ParameterError(f"path_index must be >= 0, got {path_index}")
        self._streams = UniformStreams(seed)
        self._index = int(path_index)
        self._draw = 0

    @property
    def path_index(self) -> int:
        return self._index

    def random(self) -> float:
        u = self._streams.value(self._draw, self._index)
        self._draw += 1
        return u
