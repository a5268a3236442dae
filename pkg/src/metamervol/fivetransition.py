"""Prior-art mismatch-volume baseline: fitted 5-transition step functions.

Randomly seeded step spectra with at most five transitions are adjusted so
their first-system response hits the target, then mapped through the second
system and hulled.  Transition wavelengths move continuously: a transition
inside a grid cell contributes fractional coverage of that cell, which keeps
the fitting residual continuous in the wavelengths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox
from scipy.optimize import minimize

from .geometry import FlatHullError, convex_hull, volume
from .mmv import MismatchProblem, MmvResult
from .spectral import Reflectance, WavelengthGrid

__all__ = [
    "StepSpectrum",
    "DegenerateBaselineError",
    "evaluate",
    "evaluate_fractional",
    "fit_to_target",
    "baseline_mmv",
]

MAX_TRANSITIONS = 5


class DegenerateBaselineError(ValueError):
    """Too few accepted step spectra to span a volume."""


@dataclass(frozen=True)
class StepSpectrum:
    """Binary step function: value flips at each transition wavelength."""

    transitions: tuple[float, ...]
    starts_at: int  # 0 or 1

    def __post_init__(self):
        if self.starts_at not in (0, 1):
            raise ValueError("starts_at must be 0 or 1")
        ts = tuple(float(t) for t in self.transitions)
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("transitions must be strictly increasing")
        object.__setattr__(self, "transitions", ts)


def evaluate(s: StepSpectrum, grid: WavelengthGrid) -> Reflectance:
    """Sample the step function at the grid points.

    A transition at a grid point affects only later indices, so coincident
    transitions inside one cell may merge.
    """
    lams = grid.wavelengths
    flips = np.searchsorted(np.asarray(s.transitions), lams, side="left")
    return Reflectance(grid, ((s.starts_at + flips) % 2).astype(float))


def _coverage(ts_sorted: np.ndarray, starts_at: int, grid: WavelengthGrid) -> np.ndarray:
    """Fraction of each width-delta cell covered by the 1-valued segments."""
    delta = grid.delta
    lo = grid.lambda_min - delta / 2.0
    hi = grid.lambda_max + delta / 2.0
    edges = lo + delta * np.arange(grid.q + 1)

    ts = np.clip(ts_sorted, lo, hi)
    knots = np.concatenate([[lo], ts, [hi]])
    seg_values = (starts_at + np.arange(len(ts) + 1)) % 2
    cum = np.concatenate([[0.0], np.cumsum(seg_values * np.diff(knots))])
    covered = np.interp(edges, knots, cum)
    return np.diff(covered) / delta


def evaluate_fractional(s: StepSpectrum, grid: WavelengthGrid) -> np.ndarray:
    """Cell-coverage sampling: a straddled cell gets the covered fraction.

    Each grid point represents a cell of width delta centred on it (matching
    the rectangle rule), which makes responses continuous in the transition
    wavelengths.
    """
    return _coverage(np.asarray(s.transitions, dtype=float), s.starts_at, grid)


def _residual_fn(problem: MismatchProblem, starts_at: int):
    eq = problem.eq_matrix()  # q x N, delta included
    grid = problem.grid
    z0 = problem.z0

    def residual(ts: np.ndarray) -> float:
        frac = _coverage(np.sort(ts), starts_at, grid)
        return float(np.linalg.norm(frac @ eq - z0))

    return residual


def acceptance_tolerance(problem: MismatchProblem) -> float:
    return 1e-6 * float(np.abs(problem.z0).max())


def fit_to_target(
    problem: MismatchProblem, seed_spectrum: StepSpectrum
) -> tuple[StepSpectrum, float]:
    """Locally minimise |Phi(r) - z0| over the transition wavelengths.

    Derivative-free simplex search capped at 200 iterations per transition;
    the result never has a larger residual than the seed.
    """
    grid = problem.grid
    m = len(seed_spectrum.transitions)
    residual = _residual_fn(problem, seed_spectrum.starts_at)
    if m == 0:
        return seed_spectrum, residual(np.empty(0))

    res = minimize(
        residual,
        x0=np.asarray(seed_spectrum.transitions),
        method="Nelder-Mead",
        options={
            "maxiter": 200 * m,
            "xatol": 1e-9,
            "fatol": 1e-3 * acceptance_tolerance(problem),
        },
    )
    ts = np.sort(np.clip(res.x, grid.lambda_min, grid.lambda_max))
    # merge coincident transitions so the invariant (strictly increasing) holds
    keep = np.concatenate([[True], np.diff(ts) > 0])
    fitted = StepSpectrum(tuple(ts[keep]), seed_spectrum.starts_at)
    return fitted, float(res.fun)


def random_seeds(
    grid: WavelengthGrid, n_seeds: int, seed: int
) -> list[StepSpectrum]:
    """Random step spectra: transition count uniform on 0..5, sorted uniform
    wavelengths, random polarity."""
    rng = Generator(Philox(key=seed))
    out = []
    for _ in range(n_seeds):
        m = int(rng.integers(0, MAX_TRANSITIONS + 1))
        ts = np.sort(rng.uniform(grid.lambda_min, grid.lambda_max, size=m))
        while np.any(np.diff(ts) <= 0):  # ties have probability ~0
            ts = np.sort(rng.uniform(grid.lambda_min, grid.lambda_max, size=m))
        out.append(StepSpectrum(tuple(ts), int(rng.integers(0, 2))))
    return out


def baseline_mmv(
    problem: MismatchProblem, n_seeds: int, seed: int
) -> MmvResult:
    """Fit n_seeds random step spectra to the target and hull the survivors.

    Seeds whose fitted residual exceeds the acceptance tolerance are
    discarded without replacement.
    """
    grid = problem.grid
    tol = acceptance_tolerance(problem)
    accepted_rows = []
    for s in random_seeds(grid, n_seeds, seed):
        fitted, resid = fit_to_target(problem, s)
        if resid <= tol:
            accepted_rows.append(evaluate_fractional(fitted, grid))

    if len(accepted_rows) < 4:
        raise DegenerateBaselineError(
            f"only {len(accepted_rows)} of {n_seeds} seeds reached the target"
        )
    rows = np.vstack(accepted_rows)
    points = grid.delta * (rows @ problem.psi.spectra)
    try:
        hull = convex_hull(np.unique(points, axis=0))
    except FlatHullError as exc:
        raise DegenerateBaselineError("accepted points are coplanar") from exc
    return MmvResult(
        points=points,
        spectra=[Reflectance(grid, row) for row in rows],
        hull=hull,
        volume=volume(hull),
        method="five_transition",
        sample_count=n_seeds,
        wavelength_step=grid.delta,
    )
