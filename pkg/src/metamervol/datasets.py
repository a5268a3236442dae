"""Loaders for the spectral data shipped with the package.

The bundled CSVs hold the Judd-Vos revised 2-degree colour matching
functions and the D65, A and F11 illuminants at their native 5 nm
resolution.  ``METAMERVOL_DATA`` overrides the data directory.
"""

from __future__ import annotations

import os
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .spectral import ColourSystem, Spectrum, WavelengthGrid, load_spectral_table, make_colour_system

__all__ = [
    "CANONICAL_GRID",
    "ILLUMINANTS",
    "data_dir",
    "load_cmfs",
    "load_illuminant",
    "colour_system",
]

#: Default working grid: 380-730 nm at 1 nm (q = 351).
CANONICAL_GRID = WavelengthGrid(380.0, 730.0, 1.0)

ILLUMINANTS = ("D65", "A", "F11")

_ENV_VAR = "METAMERVOL_DATA"


def data_dir() -> Path:
    override = os.environ.get(_ENV_VAR)
    if override:
        return Path(override)
    return Path(resources.files("metamervol") / "data")


@lru_cache(maxsize=None)
def _table(filename: str) -> dict[str, Spectrum]:
    return load_spectral_table(data_dir() / filename)


def load_cmfs() -> list[Spectrum]:
    """Judd-Vos 2-degree colour matching functions (xbar, ybar, zbar)."""
    table = _table("cmf_judd_vos_2deg.csv")
    return [table["xbar"], table["ybar"], table["zbar"]]


def load_illuminant(name: str) -> Spectrum:
    """One of the shipped illuminants: D65, A or F11."""
    key = name.upper()
    if key not in ILLUMINANTS:
        raise KeyError(f"unknown illuminant {name!r}; choose from {ILLUMINANTS}")
    return _table(f"illuminant_{key.lower()}.csv")[key]


@lru_cache(maxsize=None)
def colour_system(illuminant: str, grid: WavelengthGrid = CANONICAL_GRID) -> ColourSystem:
    """Judd-Vos CMFs under a shipped illuminant, sampled on the grid."""
    return make_colour_system(
        load_cmfs(),
        load_illuminant(illuminant),
        grid,
        names=(f"x.{illuminant}", f"y.{illuminant}", f"z.{illuminant}"),
    )
