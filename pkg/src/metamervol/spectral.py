"""Wavelength grids, spectra, colour systems and colour formation.

A colour system is the per-wavelength product of sensor sensitivities and an
illuminant power distribution, held as a q x N value table on a shared
uniform wavelength grid.  Responses are computed with the rectangle rule
scaled by the grid step, so values are comparable across wavelength
resolutions.  All types are immutable after construction and all operations
are pure functions.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

__all__ = [
    "WavelengthGrid",
    "Spectrum",
    "ColourSystem",
    "Reflectance",
    "SpectralDataError",
    "GridMismatchError",
    "RangeError",
    "RankDeficientError",
    "load_spectral_table",
    "resample",
    "make_colour_system",
    "respond",
    "respond_many",
    "stack",
    "orthonormalize",
    "svd_factors",
]

#: Colour responses are plain float vectors of length N (sensor count).
ColourResponse = np.ndarray


class SpectralDataError(ValueError):
    """Malformed spectral data; carries the offending 1-based data row."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        suffix = f" (row {row})" if row is not None else ""
        super().__init__(message + suffix)


class GridMismatchError(ValueError):
    """Operands live on different wavelength grids."""


class RangeError(ValueError):
    """Resampling target extends beyond the source wavelength range."""


class RankDeficientError(ValueError):
    """Colour system columns are not linearly independent."""

    def __init__(self, index: int, ratio: float):
        self.index = index
        self.ratio = ratio
        super().__init__(
            f"singular value {index} is below tolerance "
            f"(ratio to largest: {ratio:.3e})"
        )


@dataclass(frozen=True)
class WavelengthGrid:
    """Uniform sampling of [lambda_min, lambda_max] with step delta (nm)."""

    lambda_min: float
    lambda_max: float
    delta: float

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError(f"grid step must be positive, got {self.delta}")
        if self.q < 2:
            raise ValueError(
                f"grid [{self.lambda_min}, {self.lambda_max}] @ {self.delta} "
                "has fewer than 2 samples"
            )

    @property
    def q(self) -> int:
        """Number of samples: floor((max - min) / delta) + 1."""
        span = self.lambda_max - self.lambda_min
        return int(math.floor(span / self.delta + 1e-9)) + 1

    @property
    def wavelengths(self) -> np.ndarray:
        return self.lambda_min + self.delta * np.arange(self.q)


def _frozen(values, q: int | None = None, name: str = "values") -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if q is not None and arr.shape[0] != q:
        raise ValueError(f"{name} has length {arr.shape[0]}, grid has q={q}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Spectrum:
    """Per-wavelength values on a grid (illuminant power, sensitivity, ...)."""

    grid: WavelengthGrid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, self.grid.q))


@dataclass(frozen=True)
class Reflectance:
    """A q-vector of reflectivities, every value in [0, 1]."""

    grid: WavelengthGrid
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values, self.grid.q)
        if vals.min(initial=0.0) < 0.0 or vals.max(initial=0.0) > 1.0:
            bad = int(np.argmax((vals < 0.0) | (vals > 1.0)))
            raise ValueError(
                f"reflectance value {vals[bad]} at sample {bad} is outside [0, 1]"
            )
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class ColourSystem:
    """N sensor-times-illuminant product spectra as a q x N table."""

    grid: WavelengthGrid
    spectra: np.ndarray
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        arr = np.asarray(self.spectra, dtype=float)
        if arr.ndim != 2:
            raise ValueError("spectra must be a q x N table")
        if arr.shape[0] != self.grid.q:
            raise ValueError(
                f"spectra table has {arr.shape[0]} rows, grid has q={self.grid.q}"
            )
        if arr.shape[1] < 1:
            raise ValueError("colour system needs at least one sensor")
        if not np.all(np.isfinite(arr)):
            raise ValueError("spectra table contains non-finite entries")
        if self.names is not None and len(self.names) != arr.shape[1]:
            raise ValueError("names length does not match sensor count")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "spectra", arr)

    @property
    def n_sensors(self) -> int:
        return self.spectra.shape[1]


def _open_text(source) -> Iterable[str]:
    if isinstance(source, (str, Path)):
        return Path(source).read_text(encoding="utf-8").splitlines()
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data.splitlines()


def load_spectral_table(source: str | Path | IO) -> dict[str, Spectrum]:
    """Read named spectra from a CSV file or stream.

    Format: first column ``wavelength_nm``, remaining columns one named
    spectrum each; ``#`` starts a comment line; wavelengths must be strictly
    increasing and uniformly spaced.  Returns an ordered mapping from column
    name to Spectrum on the file's native grid; a header-only file yields an
    empty mapping.
    """
    lines = [ln for ln in _open_text(source) if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        return {}
    rows = list(csv.reader(io.StringIO("\n".join(lines))))
    header = [h.strip() for h in rows[0]]
    if len(header) < 1:
        raise SpectralDataError("empty header")
    names = header[1:]
    if not rows[1:]:
        return {}

    n_cols = len(header)
    lams = np.empty(len(rows) - 1)
    table = np.empty((len(rows) - 1, len(names)))
    for i, row in enumerate(rows[1:], start=1):
        if len(row) != n_cols:
            raise SpectralDataError(
                f"expected {n_cols} columns, found {len(row)}", row=i
            )
        try:
            vals = [float(cell) for cell in row]
        except ValueError:
            raise SpectralDataError(f"non-numeric entry in {row!r}", row=i) from None
        if any(math.isnan(v) for v in vals):
            raise SpectralDataError("NaN entry", row=i)
        lams[i - 1] = vals[0]
        table[i - 1] = vals[1:]
        if i >= 2 and lams[i - 1] <= lams[i - 2]:
            raise SpectralDataError(
                f"wavelengths not strictly increasing: {lams[i-2]} -> {lams[i-1]}",
                row=i,
            )

    if len(lams) < 2:
        raise SpectralDataError("need at least two wavelength rows")
    steps = np.diff(lams)
    if np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, steps[0]):
        bad = int(np.argmax(np.abs(steps - steps[0]))) + 2
        raise SpectralDataError("wavelength spacing is not uniform", row=bad)
    grid = WavelengthGrid(float(lams[0]), float(lams[-1]), float(steps[0]))
    return {name: Spectrum(grid, table[:, j]) for j, name in enumerate(names)}


def resample(s: Spectrum, target: WavelengthGrid) -> Spectrum:
    """Linearly interpolate a spectrum onto a target grid (no extrapolation)."""
    if target == s.grid:
        return s
    src = s.grid.wavelengths
    dst = target.wavelengths
    eps = 1e-9
    if dst[0] < src[0] - eps or dst[-1] > src[-1] + eps:
        raise RangeError(
            f"target range [{dst[0]}, {dst[-1]}] exceeds source range "
            f"[{src[0]}, {src[-1]}]"
        )
    return Spectrum(target, np.interp(dst, src, s.values))


def make_colour_system(
    cmfs: Sequence[Spectrum],
    illuminant: Spectrum,
    grid: WavelengthGrid,
    names: Sequence[str] | None = None,
) -> ColourSystem:
    """Build the q x N table s_i = c_i * e on the given grid.

    Inputs are resampled onto the grid first; a RangeError propagates when a
    source does not cover it.
    """
    e = resample(illuminant, grid).values
    cols = [resample(c, grid).values * e for c in cmfs]
    return ColourSystem(
        grid, np.stack(cols, axis=1), tuple(names) if names is not None else None
    )


def _check_grid(sys: ColourSystem, r: Reflectance) -> None:
    if sys.grid != r.grid:
        raise GridMismatchError(
            f"colour system grid {sys.grid} != reflectance grid {r.grid}"
        )


def respond(sys: ColourSystem, r: Reflectance) -> ColourResponse:
    """Colour formation: response_i = delta * sum_j r_j s_i(lambda_j)."""
    _check_grid(sys, r)
    return sys.grid.delta * (r.values @ sys.spectra)


def respond_many(sys: ColourSystem, values: np.ndarray) -> np.ndarray:
    """Vectorised respond for an m x q matrix of reflectance rows."""
    return sys.grid.delta * (np.asarray(values, dtype=float) @ sys.spectra)


def stack(sys_phi: ColourSystem, sys_psi: ColourSystem) -> ColourSystem:
    """Concatenate two N-sensor systems into one 2N-sensor system."""
    if sys_phi.grid != sys_psi.grid:
        raise GridMismatchError("stacked systems must share a grid")
    if sys_phi.n_sensors != sys_psi.n_sensors:
        raise ValueError("stacked systems must have the same sensor count")
    names = None
    if sys_phi.names is not None and sys_psi.names is not None:
        names = sys_phi.names + sys_psi.names
    return ColourSystem(
        sys_phi.grid, np.hstack([sys_phi.spectra, sys_psi.spectra]), names
    )


_RANK_RTOL = 1e-10


def svd_factors(sys: ColourSystem) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD of the spectra table with a deterministic sign convention.

    Returns (U, s, V) with spectra = U @ diag(s) @ V.T and the largest-magnitude
    entry of each U column forced positive.  Raises RankDeficientError when a
    singular value falls below tolerance relative to the largest.
    """
    u, s, vt = np.linalg.svd(sys.spectra, full_matrices=False)
    for i, sv in enumerate(s):
        if sv <= _RANK_RTOL * s[0]:
            raise RankDeficientError(i, float(sv / s[0]))
    flip = np.where(u[np.argmax(np.abs(u), axis=0), np.arange(u.shape[1])] < 0, -1.0, 1.0)
    return u * flip, s, vt.T * flip


def orthonormalize(sys: ColourSystem) -> tuple[ColourSystem, np.ndarray]:
    """Orthonormal spectra spanning the system, ordered by singular value.

    The returned table U satisfies U.T @ U = I and spans the same column
    space as the input; singular values come back in decreasing order.
    """
    u, s, _ = svd_factors(sys)
    return ColourSystem(sys.grid, u), s
