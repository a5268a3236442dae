"""Object colour solid boundaries from spherically sampled directions.

Every unit direction k picks out the reflectance that maximises the
projected response: 1 where k . s(lambda) >= 0 and 0 elsewhere.  Collecting
those optimal spectra over many directions yields an inscribed vertex cloud
of the solid; keeping (k, k . response) pairs instead yields a circumscribed
half-space representation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .spectral import ColourSystem, Reflectance
from .sphere import DirectionSet

__all__ = [
    "BoundarySample",
    "HalfspaceRep",
    "optimal_reflectance",
    "build_boundary",
    "build_halfspace_rep",
    "boundary_arrays",
    "count_transitions",
]

_CHUNK = 20_000


@dataclass(frozen=True)
class BoundarySample:
    """One boundary point: direction, its optimal spectrum and response."""

    direction: np.ndarray
    reflectance: Reflectance
    response: np.ndarray
    transitions: int


@dataclass(frozen=True)
class HalfspaceRep:
    """Rows (normals[i], offsets[i]) of k_i . x <= b_i around the solid."""

    normals: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        if self.normals.shape[0] != self.offsets.shape[0]:
            raise ValueError("normals and offsets disagree on row count")

    @property
    def count(self) -> int:
        return self.offsets.shape[0]


def optimal_reflectance(sys: ColourSystem, k: np.ndarray) -> Reflectance:
    """Binary reflectance maximising k . respond(sys, r) over [0,1]^q."""
    projected = sys.spectra @ np.asarray(k, dtype=float)
    return Reflectance(sys.grid, (projected >= 0.0).astype(float))


def count_transitions(r: Reflectance | np.ndarray) -> int:
    """Number of adjacent unequal pairs in a binary reflectance."""
    vals = r.values if isinstance(r, Reflectance) else np.asarray(r)
    return int(np.count_nonzero(np.diff(vals) != 0))


def boundary_arrays(
    sys: ColourSystem, vectors: np.ndarray
) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Stream (binary spectra, responses, transition counts) per chunk.

    Vectorised core shared by the list-building and half-space paths; chunking
    keeps the m x q sign table bounded regardless of the direction count.
    """
    table = sys.spectra  # q x N
    delta = sys.grid.delta
    for lo in range(0, vectors.shape[0], _CHUNK):
        chunk = vectors[lo : lo + _CHUNK]
        binary = (chunk @ table.T) >= 0.0
        spectra = binary.astype(float)
        responses = delta * (spectra @ table)
        transitions = np.count_nonzero(np.diff(binary, axis=1), axis=1)
        yield spectra, responses, transitions


def build_boundary(sys: ColourSystem, dirs: DirectionSet) -> list[BoundarySample]:
    """One BoundarySample per direction, in direction order."""
    if dirs.dim != sys.n_sensors:
        raise ValueError(
            f"direction dim {dirs.dim} != sensor count {sys.n_sensors}"
        )
    out: list[BoundarySample] = []
    pos = 0
    for spectra, responses, transitions in boundary_arrays(sys, dirs.vectors):
        for i in range(spectra.shape[0]):
            out.append(
                BoundarySample(
                    direction=dirs.vectors[pos + i],
                    reflectance=Reflectance(sys.grid, spectra[i]),
                    response=responses[i],
                    transitions=int(transitions[i]),
                )
            )
        pos += spectra.shape[0]
    return out


def build_halfspace_rep(sys: ColourSystem, dirs: DirectionSet) -> HalfspaceRep:
    """Supporting half-space per direction: offset b_i = k_i . response_i."""
    if dirs.dim != sys.n_sensors:
        raise ValueError(
            f"direction dim {dirs.dim} != sensor count {sys.n_sensors}"
        )
    offsets = np.empty(dirs.count)
    pos = 0
    for _, responses, _ in boundary_arrays(sys, dirs.vectors):
        m = responses.shape[0]
        offsets[pos : pos + m] = np.einsum(
            "ij,ij->i", dirs.vectors[pos : pos + m], responses
        )
        pos += m
    return HalfspaceRep(dirs.vectors, offsets)
