"""3-D convex geometry: hulls, volumes, interior points, half-space slicing.

Hulls are computed with Qhull (scipy) and re-exposed with consistently
outward-oriented triangle faces.  Half-space intersection goes through the
classic duality transform: translate a strictly interior point to the
origin, map each half-space a.x <= b (b > 0) to the dual point a/b, hull
the dual points, and read one primal vertex off every dual facet.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

__all__ = [
    "Hull3",
    "Halfspace3",
    "FlatHullError",
    "InfeasibleRegionError",
    "UnboundedRegionError",
    "convex_hull",
    "volume",
    "interior_point",
    "halfspace_intersection",
    "intersect_halfspace_arrays",
    "binding_constraints",
]


class FlatHullError(ValueError):
    """Input points span fewer than 3 dimensions."""


class InfeasibleRegionError(ValueError):
    """Half-space intersection has empty interior; carries max-min slack."""

    def __init__(self, slack: float):
        self.slack = slack
        super().__init__(f"no interior point (max-min slack {slack:.3e})")


class UnboundedRegionError(ValueError):
    """Half-space intersection is unbounded."""


@dataclass(frozen=True)
class Hull3:
    """Convex hull with triangle faces and outward unit face normals."""

    vertices: np.ndarray
    faces: np.ndarray
    face_normals: np.ndarray

    def __post_init__(self):
        for name in ("vertices", "faces", "face_normals"):
            arr = np.asarray(getattr(self, name))
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def edge_count(self) -> int:
        e = np.vstack([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]])
        return len(np.unique(np.sort(e, axis=1), axis=0))


@dataclass(frozen=True)
class Halfspace3:
    """The set {x : normal . x <= offset} with a unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if n.shape != (3,):
            raise ValueError("normal must be a 3-vector")
        length = float(np.linalg.norm(n))
        if length < 1e-12:
            raise ValueError("half-space normal is numerically zero")
        n = n / length
        n.flags.writeable = False
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset) / length)


def _as_arrays(halfspaces: Sequence[Halfspace3]) -> tuple[np.ndarray, np.ndarray]:
    a = np.array([h.normal for h in halfspaces], dtype=float)
    b = np.array([h.offset for h in halfspaces], dtype=float)
    return a, b


def _affine_rank(points: np.ndarray) -> int:
    centred = points - points.mean(axis=0)
    scale = float(np.abs(centred).max())
    if scale == 0.0:
        return 0
    sv = np.linalg.svd(centred / scale, compute_uv=False)
    return int(np.sum(sv > 1e-9 * np.sqrt(len(points))))


def convex_hull(points: np.ndarray) -> Hull3:
    """Hull of a 3-D point set; flat or tiny inputs raise distinct errors."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("points must be an m x 3 array")
    if pts.shape[0] < 4:
        raise ValueError(f"need at least 4 points, got {pts.shape[0]}")
    if _affine_rank(pts) < 3:
        raise FlatHullError("points are coplanar or collinear")
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:  # rank check above should catch flats first
        raise FlatHullError(str(exc)) from exc

    remap = -np.ones(pts.shape[0], dtype=np.intp)
    remap[hull.vertices] = np.arange(len(hull.vertices))
    faces = remap[hull.simplices]
    verts = pts[hull.vertices]
    normals = hull.equations[:, :3]

    # orient each triangle counter-clockwise as seen from outside
    v0, v1, v2 = (verts[faces[:, i]] for i in range(3))
    flip = np.einsum("ij,ij->i", np.cross(v1 - v0, v2 - v0), normals) < 0
    faces[flip] = faces[flip][:, [0, 2, 1]]
    return Hull3(verts, faces, normals)


def volume(h: Hull3) -> float:
    """Volume as the sum of signed tetrahedra from the vertex centroid."""
    ref = h.vertices.mean(axis=0)
    v0 = h.vertices[h.faces[:, 0]] - ref
    v1 = h.vertices[h.faces[:, 1]] - ref
    v2 = h.vertices[h.faces[:, 2]] - ref
    total = np.einsum("ij,ij->i", v0, np.cross(v1, v2)).sum() / 6.0
    return float(max(total, 0.0))


_BOX_LIMIT = 1e9


def interior_point(halfspaces: Sequence[Halfspace3]) -> np.ndarray:
    """Chebyshev centre of the intersection (deepest interior point).

    Solves max rho s.t. a_i . x + rho <= b_i inside a +-1e9 bounding box;
    raises InfeasibleRegionError (carrying the max-min slack) when the
    intersection has empty interior.
    """
    a, b = _as_arrays(halfspaces)
    x, rho = _chebyshev(a, b)
    if rho <= 1e-12:
        raise InfeasibleRegionError(rho)
    return x


def _chebyshev(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    m = a.shape[0]
    a_ub = np.hstack([a, np.ones((m, 1))])
    res = linprog(
        c=[0.0, 0.0, 0.0, -1.0],
        A_ub=a_ub,
        b_ub=b,
        bounds=[(-_BOX_LIMIT, _BOX_LIMIT)] * 3 + [(None, _BOX_LIMIT)],
        method="highs",
    )
    if not res.success:
        raise InfeasibleRegionError(-np.inf)
    return res.x[:3], float(res.x[3])


def halfspace_intersection(
    halfspaces: Sequence[Halfspace3],
    interior: np.ndarray | None = None,
) -> Hull3:
    """Vertex representation of an intersection of half-spaces."""
    a, b = _as_arrays(halfspaces)
    return intersect_halfspace_arrays(a, b, interior)


def intersect_halfspace_arrays(
    a: np.ndarray,
    b: np.ndarray,
    interior: np.ndarray | None = None,
) -> Hull3:
    """Array fast path of halfspace_intersection: rows of a are unit normals."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if interior is None:
        interior, rho = _chebyshev(a, b)
        if rho <= 1e-12:
            raise InfeasibleRegionError(rho)
    else:
        interior = np.asarray(interior, dtype=float)

    slack = b - a @ interior
    min_slack = float(slack.min())
    if min_slack <= 0.0:
        raise InfeasibleRegionError(min_slack)

    dual = a / slack[:, None]
    try:
        dual_hull = ConvexHull(dual)
    except QhullError as exc:
        # dual points degenerate <=> normals miss a direction <=> unbounded
        raise UnboundedRegionError(str(exc)) from exc

    # origin strictly inside the dual hull <=> primal bounded
    plane_offsets = -dual_hull.equations[:, 3]
    scale = float(np.abs(dual).max())
    if plane_offsets.min() <= 1e-12 * scale:
        raise UnboundedRegionError("direction set does not enclose the region")

    verts = dual_hull.equations[:, :3] / plane_offsets[:, None] + interior

    # coplanar dual facets reproduce the same primal vertex; merge them
    span = float(np.abs(verts - interior).max())
    quant = np.round(verts / (1e-9 * max(span, 1e-300)))
    _, keep = np.unique(quant, axis=0, return_index=True)
    verts = verts[np.sort(keep)]
    return convex_hull(verts)


def binding_constraints(
    hull: Hull3, a: np.ndarray, b: np.ndarray, tol: float = 1e-7
) -> np.ndarray:
    """Indices of half-spaces active (within tol) at 3 or more hull vertices."""
    active = np.abs(hull.vertices @ np.asarray(a, dtype=float).T - b) <= tol * (
        1.0 + np.abs(b)
    )
    return np.flatnonzero(active.sum(axis=0) >= 3)
