"""Metamer mismatch volume engines.

Two routes to the same convex body.  The LP route extremizes spherically
sampled 6-D directions over the metamer set of the target response, giving
an inscribed point cloud; the half-space route builds a circumscribed
representation of the 6-D solid of the stacked colour system and slices it
with the affine subspace pinning the first three coordinates, giving an
outer polytope.  Both support the orthonormal-spectra reparametrisation,
realised as direction sampling through the SVD factors of the stacked
system.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import lp
from .geometry import Hull3, intersect_halfspace_arrays, convex_hull, volume
from .ocs import boundary_arrays
from .spectral import ColourSystem, Reflectance, respond, stack, svd_factors
from .sphere import DirectionSet

__all__ = [
    "MismatchProblem",
    "MmvResult",
    "InfeasibleTargetError",
    "DegenerateSliceError",
    "grey_problem",
    "mmv_lp",
    "mmv_halfspace",
    "classify_transitions",
]


class InfeasibleTargetError(ValueError):
    """Target response lies outside the object colour solid of phi."""


class DegenerateSliceError(ValueError):
    """Mismatch volume is empty or flat at this target."""


@dataclass(frozen=True)
class MismatchProblem:
    """Fixed first system, changed second system, and a target response z0."""

    phi: ColourSystem
    psi: ColourSystem
    z0: np.ndarray

    def __post_init__(self):
        if self.phi.grid != self.psi.grid:
            raise ValueError("phi and psi must share a wavelength grid")
        if self.phi.n_sensors != self.psi.n_sensors:
            raise ValueError("phi and psi must have equal sensor counts")
        z = np.asarray(self.z0, dtype=float).copy()
        if z.shape != (self.phi.n_sensors,):
            raise ValueError("z0 length must equal the sensor count")
        z.flags.writeable = False
        object.__setattr__(self, "z0", z)

    @property
    def grid(self):
        return self.phi.grid

    def eq_matrix(self) -> np.ndarray:
        """Equality rows of the metamer set: delta-scaled phi spectra."""
        return self.grid.delta * self.phi.spectra


def grey_problem(
    phi: ColourSystem, psi: ColourSystem, level: float
) -> MismatchProblem:
    """Problem targeting the response of the flat grey at the given level."""
    grey = Reflectance(phi.grid, np.full(phi.grid.q, float(level)))
    return MismatchProblem(phi, psi, respond(phi, grey))


@dataclass(frozen=True)
class MmvResult:
    """Boundary points, spectra (LP methods), hull and volume of one MMV."""

    points: np.ndarray
    spectra: Optional[list[Reflectance]]
    hull: Hull3
    volume: float
    method: str  # lp_original | lp_orthonormal | halfspace_slice | five_transition
    sample_count: int
    wavelength_step: float


def _stacked_objectives(
    problem: MismatchProblem, vectors: np.ndarray, use_orthonormal: bool
) -> np.ndarray:
    """Per-direction LP objectives: rows of (S k)^T or (U k)^T."""
    stacked = stack(problem.phi, problem.psi)
    if use_orthonormal:
        u, _, _ = svd_factors(stacked)
        return vectors @ u.T
    return vectors @ stacked.spectra.T


def _locality_order(vectors: np.ndarray) -> np.ndarray:
    """Greedy nearest-neighbour tour over the directions.

    Neighbouring directions share most of their optimal sign pattern, so
    visiting them consecutively lets the warm-started simplex move in a few
    bound flips instead of re-crossing half the spectrum per solve.
    """
    from scipy.spatial import cKDTree

    m = vectors.shape[0]
    if m <= 2:
        return np.arange(m, dtype=np.intp)
    tree = cKDTree(vectors)
    visited = np.zeros(m, dtype=bool)
    order = np.empty(m, dtype=np.intp)
    cur = 0
    for i in range(m):
        order[i] = cur
        visited[cur] = True
        if i == m - 1:
            break
        k = 4
        while True:
            _, jj = tree.query(vectors[cur], k=min(k, m))
            nxt = jj[~visited[jj]]
            if nxt.size:
                cur = int(nxt[0])
                break
            if k >= m:
                cur = int(np.flatnonzero(~visited)[0])
                break
            k *= 4
    return order


def mmv_lp(
    problem: MismatchProblem,
    dirs: DirectionSet,
    use_orthonormal: bool = True,
) -> MmvResult:
    """Mismatch volume by LP extremization of sampled 6-D directions."""
    n = problem.phi.n_sensors
    if dirs.dim != 2 * n:
        raise ValueError(f"directions must live in R^{2*n}, got R^{dirs.dim}")

    objectives = _stacked_objectives(problem, dirs.vectors, use_orthonormal)
    order = _locality_order(dirs.vectors)
    try:
        solutions = lp.solve_many(
            problem.eq_matrix(), problem.z0, objectives[order]
        )
    except lp.InfeasibleSystemError as exc:
        raise InfeasibleTargetError(
            "target response is outside the object colour solid"
        ) from exc

    grid = problem.grid
    spectra_rows = np.empty((dirs.count, grid.q))
    spectra_rows[order] = np.vstack([s.r for s in solutions])
    points = grid.delta * (spectra_rows @ problem.psi.spectra)
    hull = convex_hull(np.unique(points, axis=0))
    return MmvResult(
        points=points,
        spectra=[Reflectance(grid, row) for row in spectra_rows],
        hull=hull,
        volume=volume(hull),
        method="lp_orthonormal" if use_orthonormal else "lp_original",
        sample_count=dirs.count,
        wavelength_step=grid.delta,
    )


def _interior_psi_point(problem: MismatchProblem) -> np.ndarray:
    """A point strictly inside the mismatch volume.

    Averages the psi-images of the +-axis LP extremizers and a feasible
    point; the average can only sit on the boundary when the volume is flat.
    """
    n = problem.psi.n_sensors
    eq = problem.eq_matrix()
    feas = lp.feasible_point(lp.BoxedLp(np.zeros(problem.grid.q), eq, problem.z0))
    if feas is None:
        raise InfeasibleTargetError(
            "target response is outside the object colour solid"
        )
    axes = np.vstack([np.eye(n), -np.eye(n)])
    objectives = axes @ problem.psi.spectra.T
    sols = lp.solve_many(eq, problem.z0, objectives)
    rows = np.vstack([s.r for s in sols] + [feas])
    return problem.grid.delta * (rows @ problem.psi.spectra).mean(axis=0)


def _slice_rows(
    problem: MismatchProblem, vectors: np.ndarray, use_orthonormal: bool
) -> tuple[np.ndarray, np.ndarray]:
    """3-D half-space rows of the sliced stacked-system solid."""
    stacked = stack(problem.phi, problem.psi)
    n = problem.phi.n_sensors
    if use_orthonormal:
        _, s, v = svd_factors(stacked)
        eff = vectors @ (v / s).T  # k -> V D^-1 k, the U-sampling equivalence
        eff /= np.linalg.norm(eff, axis=1)[:, None]
    else:
        eff = vectors

    t = eff.shape[0]
    normals = np.empty((t, n))
    offsets = np.empty(t)
    pos = 0
    for _, responses, _ in boundary_arrays(stacked, eff):
        m = responses.shape[0]
        block = eff[pos : pos + m]
        b = np.einsum("ij,ij->i", block, responses)
        normals[pos : pos + m] = block[:, n:]
        offsets[pos : pos + m] = b - block[:, :n] @ problem.z0
        pos += m

    lengths = np.linalg.norm(normals, axis=1)
    keep = lengths > 1e-12
    normals = normals[keep] / lengths[keep, None]
    offsets = offsets[keep] / lengths[keep]
    return normals, offsets


def mmv_halfspace(
    problem: MismatchProblem,
    dirs: DirectionSet,
    use_orthonormal: bool = True,
) -> MmvResult:
    """Mismatch volume as an affine slice of the 6-D half-space solid.

    No per-direction optimisation: each sampled direction contributes one
    supporting half-space of the stacked solid, the target pins the first
    three coordinates, and the surviving 3-D half-spaces are intersected by
    the duality transform.
    """
    n = problem.phi.n_sensors
    if dirs.dim != 2 * n:
        raise ValueError(f"directions must live in R^{2*n}, got R^{dirs.dim}")

    normals, offsets = _slice_rows(problem, dirs.vectors, use_orthonormal)
    if normals.shape[0] < 4:
        raise DegenerateSliceError("too few usable half-spaces after slicing")

    inner = _interior_psi_point(problem)
    slack = offsets - normals @ inner
    if float(slack.min()) <= 0.0:
        raise DegenerateSliceError(
            f"no strictly interior point (min slack {float(slack.min()):.3e}); "
            "the mismatch volume is flat or empty at this target"
        )

    hull = intersect_halfspace_arrays(normals, offsets, interior=inner)
    return MmvResult(
        points=hull.vertices,
        spectra=None,
        hull=hull,
        volume=volume(hull),
        method="halfspace_slice",
        sample_count=dirs.count,
        wavelength_step=problem.grid.delta,
    )


def classify_transitions(result: MmvResult) -> dict[int, int]:
    """Histogram of transition counts over the result's boundary spectra.

    Fractional entries (at most N per spectrum) are thresholded at 0.5
    before counting.
    """
    if result.spectra is None:
        raise ValueError("transition histogram needs an LP-method result")
    counts = Counter(
        int(np.count_nonzero(np.diff(r.values >= 0.5))) for r in result.spectra
    )
    return dict(sorted(counts.items()))
