"""Deterministic uniform sampling of unit vectors on the sphere.

Vectors are standard-normal draws normalised to unit length.  The generator
is counter-based (Philox): vector i is a pure function of (seed, i), so any
index range can be produced independently and bit-identically to a
sequential run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

__all__ = ["DirectionSet", "sample_sphere", "sample_sphere_range"]

# Each vector consumes two Philox counter blocks (8 raw 64-bit words) so the
# layout is independent of dim for dim <= 8.
_BLOCKS_PER_VECTOR = 2
_WORDS_PER_VECTOR = 4 * _BLOCKS_PER_VECTOR
_NORM_FLOOR = 1e-8


@dataclass(frozen=True)
class DirectionSet:
    """M unit vectors in R^dim, reproducible from (dim, count, seed)."""

    dim: int
    count: int
    seed: int
    vectors: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.vectors, dtype=float)
        if arr.shape != (self.count, self.dim):
            raise ValueError(
                f"vectors shape {arr.shape} != (count={self.count}, dim={self.dim})"
            )
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "vectors", arr)

    def prefix(self, m: int) -> "DirectionSet":
        """First m vectors; nested subsets share the same seed."""
        if not 1 <= m <= self.count:
            raise ValueError(f"prefix length {m} outside [1, {self.count}]")
        return DirectionSet(self.dim, m, self.seed, self.vectors[:m])


def _raw_gaussians(dim: int, start: int, n: int, key: int) -> np.ndarray:
    bits = Philox(key=key, counter=_BLOCKS_PER_VECTOR * start)
    words = bits.random_raw(_WORDS_PER_VECTOR * n).reshape(n, _WORDS_PER_VECTOR)
    # 53-bit uniforms in (0, 1), then inverse normal CDF
    u = (words[:, :dim] >> np.uint64(11)) * 2.0**-53 + 2.0**-54
    return ndtri(u)


def sample_sphere_range(
    dim: int, start: int, stop: int, seed: int
) -> np.ndarray:
    """Unit vectors for indices [start, stop) of the (dim, seed) stream."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if dim > 4 * _BLOCKS_PER_VECTOR:
        raise ValueError(f"dim {dim} exceeds the per-vector word budget")
    if not 0 <= start <= stop:
        raise ValueError(f"bad index range [{start}, {stop})")
    n = stop - start
    g = _raw_gaussians(dim, start, n, seed)
    norms = np.linalg.norm(g, axis=1)
    # near-zero draws are redrawn from a rekeyed stream (probability ~0)
    attempt = 1
    while True:
        bad = np.flatnonzero(norms < _NORM_FLOOR)
        if bad.size == 0:
            break
        for i in bad:
            g[i] = _raw_gaussians(dim, start + int(i), 1, seed + (attempt << 32))[0]
        norms[bad] = np.linalg.norm(g[bad], axis=1)
        attempt += 1
    return g / norms[:, None]


def sample_sphere(dim: int, m: int, seed: int) -> DirectionSet:
    """M uniformly distributed unit vectors on S^(dim-1)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return DirectionSet(dim, m, seed, sample_sphere_range(dim, 0, m, seed))
