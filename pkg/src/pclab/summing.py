"""Deterministic compensated reduction helpers.

Large oscillatory sums are accumulated in fixed-size chunks: numpy's
pairwise summation inside each chunk, exact (fsum) combination of the
chunk partials.  The chunk tree is fixed by CHUNK alone, so results are
bit-reproducible regardless of thread count or call pattern.
"""

from __future__ import annotations

import math

import numpy as np

CHUNK = 1 << 21


def chunked_sum(values: np.ndarray, chunk: int = CHUNK) -> float:
    """Sum a 1-D float array with a fixed chunk tree and compensated top level."""
    n = len(values)
    if n == 0:
        return 0.0
    parts = [float(np.sum(values[i:i + chunk])) for i in range(0, n, chunk)]
    return math.fsum(parts)


class PartialSums:
    """Accumulates per-chunk partial sums for several quantities at once."""

    def __init__(self, width: int):
        self.parts: list[list[float]] = [[] for _ in range(width)]

    def add(self, index: int, value: float) -> None:
        self.parts[index].append(value)

    def totals(self) -> np.ndarray:
        return np.array([math.fsum(p) for p in self.parts])
