"""
Deterministic random streams.

A stream is identified by (seed, path). Child streams are derived by appending
an index to the path, so a component can hand independent randomness to its
sub-steps without sharing generator state.
"""

from typing import Sequence, Tuple

import numpy as np

_SEED_MASK = (1 << 64) - 1


class RngStream:
    """
    Counter-based random stream (Philox) keyed by a seed and a split path

    Re-creating a stream with the same (seed, path) replays the same draws.
    """

    def __init__(self, seed: int, path: Sequence[int] = ()):
        """
        Initialize stream

        Args:
            seed: 64-bit seed (larger values are masked)
            path: Split lineage, one index per split
        """
        self.seed = int(seed) & _SEED_MASK
        self.path: Tuple[int, ...] = tuple(int(i) for i in path)
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        self._generator = np.random.Generator(np.random.Philox(sequence))

    def split(self, index: int) -> "RngStream":
        """Child stream for sub-step `index`; independent of this stream's draws"""
        if index < 0:
            raise ValueError(f"Split index must be non-negative, got {index}")
        return RngStream(self.seed, self.path + (index,))

    def standard_normal(self, rows: int, cols: int) -> np.ndarray:
        return self._generator.standard_normal((rows, cols))

    def uniform(self, low: float, high: float, size) -> np.ndarray:
        return self._generator.uniform(low, high, size)

    def integers(self, low: int, high: int, size=None):
        """Integers in [low, high)"""
        return self._generator.integers(low, high, size=size)

    def permutation(self, n: int) -> np.ndarray:
        return self._generator.permutation(n)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, path={self.path})"


def gaussian(rng: RngStream, rows: int, cols: int) -> np.ndarray:
    """
    I.i.d. standard normal matrix drawn from `rng`

    Args:
        rng: Source stream
        rows: Row count (>= 1)
        cols: Column count (>= 1)

    Returns:
        rows x cols float64 matrix
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"gaussian needs rows, cols >= 1, got ({rows}, {cols})")
    return rng.standard_normal(rows, cols)
