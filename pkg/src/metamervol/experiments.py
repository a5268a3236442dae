"""Experiment drivers: sweeps, convergence runs, method comparisons.

Every runner expands a config into a deterministic task list, executes the
tasks (optionally on a thread pool; results keep task order), and emits
byte-stable results.json / results.csv plus OBJ hull meshes.  Wall-clock
timings go to a separate timings.csv sidecar so the primary outputs stay
identical across runs and thread counts.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .datasets import ILLUMINANTS, colour_system
from .fivetransition import baseline_mmv
from .geometry import Hull3, convex_hull, volume
from .mmv import MmvResult, classify_transitions, grey_problem, mmv_halfspace, mmv_lp
from .spectral import WavelengthGrid
from .sphere import sample_sphere

__all__ = [
    "ExperimentConfig",
    "ExperimentRecord",
    "METHODS",
    "run_resolution_sweep",
    "run_convergence",
    "run_comparison",
    "run_single",
    "write_outputs",
    "export_mesh",
    "load_obj",
]

METHODS = (
    "lp-original",
    "lp-orthonormal",
    "halfspace-original",
    "halfspace-orthonormal",
    "baseline",
)

_LAMBDA_MIN = 380.0
_LAMBDA_MAX = 730.0


@dataclass(frozen=True)
class ExperimentConfig:
    """Condition grid for one runner invocation."""

    phi_illuminant: str
    psi_illuminant: str
    greys: tuple[float, ...] = (0.5,)
    steps_nm: tuple[float, ...] = (1.0,)
    methods: tuple[str, ...] = ("lp-orthonormal",)
    samples: tuple[int, ...] = (1000,)
    halfspace_samples: tuple[int, ...] = (1_000_000,)
    seed: int = 0
    out_dir: Optional[Path] = None
    jobs: int = 1

    def __post_init__(self):
        for ill in (self.phi_illuminant, self.psi_illuminant):
            if ill.upper() not in ILLUMINANTS:
                raise ValueError(f"unknown illuminant {ill!r}")
        if not all(0.0 < g < 1.0 for g in self.greys):
            raise ValueError("grey levels must lie strictly inside (0, 1)")
        if not all(s > 0 for s in self.steps_nm):
            raise ValueError("wavelength steps must be positive")
        if not all(int(m) > 0 for m in self.samples + self.halfspace_samples):
            raise ValueError("sample counts must be positive")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; choose from {METHODS}")

    def echo(self) -> dict:
        return {
            "phi_illuminant": self.phi_illuminant.upper(),
            "psi_illuminant": self.psi_illuminant.upper(),
            "greys": list(self.greys),
            "steps_nm": list(self.steps_nm),
            "methods": list(self.methods),
            "samples": [int(s) for s in self.samples],
            "halfspace_samples": [int(s) for s in self.halfspace_samples],
            "seed": int(self.seed),
        }


@dataclass
class ExperimentRecord:
    """One run: condition echo, volume, counts, histogram, mesh reference."""

    method: str
    phi_illuminant: str
    psi_illuminant: str
    grey: float
    step_nm: float
    samples: int
    volume: float
    n_points: int
    n_accepted: Optional[int] = None
    transition_histogram: Optional[dict[int, int]] = None
    mesh: Optional[str] = None
    elapsed_s: float = 0.0
    hull: Optional[Hull3] = field(default=None, repr=False, compare=False)

    def as_dict(self) -> dict:
        hist = None
        if self.transition_histogram is not None:
            hist = {str(k): int(v) for k, v in sorted(self.transition_histogram.items())}
        return {
            "method": self.method,
            "phi_illuminant": self.phi_illuminant,
            "psi_illuminant": self.psi_illuminant,
            "grey": float(self.grey),
            "step_nm": float(self.step_nm),
            "samples": int(self.samples),
            "volume": float(self.volume),
            "n_points": int(self.n_points),
            "n_accepted": None if self.n_accepted is None else int(self.n_accepted),
            "transition_histogram": hist,
            "mesh": self.mesh,
        }


def run_single(
    method: str,
    phi_illuminant: str,
    psi_illuminant: str,
    grey: float,
    step_nm: float,
    samples: int,
    seed: int,
) -> tuple[ExperimentRecord, MmvResult]:
    """Execute one (method, condition, sample count) cell."""
    grid = WavelengthGrid(_LAMBDA_MIN, _LAMBDA_MAX, float(step_nm))
    phi = colour_system(phi_illuminant.upper(), grid)
    psi = colour_system(psi_illuminant.upper(), grid)
    problem = grey_problem(phi, psi, grey)

    started = time.perf_counter()
    if method == "baseline":
        result = baseline_mmv(problem, samples, seed=seed + 1)
    elif method.startswith("lp"):
        dirs = sample_sphere(2 * phi.n_sensors, samples, seed=seed)
        result = mmv_lp(problem, dirs, use_orthonormal=method.endswith("orthonormal"))
    else:
        dirs = sample_sphere(2 * phi.n_sensors, samples, seed=seed)
        result = mmv_halfspace(
            problem, dirs, use_orthonormal=method.endswith("orthonormal")
        )
    elapsed = time.perf_counter() - started

    record = ExperimentRecord(
        method=method,
        phi_illuminant=phi_illuminant.upper(),
        psi_illuminant=psi_illuminant.upper(),
        grey=float(grey),
        step_nm=float(step_nm),
        samples=int(samples),
        volume=float(result.volume),
        n_points=int(result.points.shape[0]),
        n_accepted=len(result.spectra) if result.method == "five_transition" else None,
        transition_histogram=(
            classify_transitions(result) if result.spectra is not None else None
        ),
        elapsed_s=elapsed,
        hull=result.hull,
    )
    return record, result


def _execute(tasks: list[tuple], jobs: int) -> list[ExperimentRecord]:
    """Run tasks, preserving task order in the result list."""
    if jobs <= 1:
        return [run_single(*t)[0] for t in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(run_single, *t) for t in tasks]
        return [f.result()[0] for f in futures]


def _method_samples(cfg: ExperimentConfig, method: str) -> tuple[int, ...]:
    if method.startswith("halfspace"):
        return tuple(int(s) for s in cfg.halfspace_samples)
    return tuple(int(s) for s in cfg.samples)


def run_resolution_sweep(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    """Volumes per wavelength step per sample count (LP methods)."""
    tasks = [
        (method, cfg.phi_illuminant, cfg.psi_illuminant, grey, step, m, cfg.seed)
        for method in cfg.methods
        for grey in cfg.greys
        for step in cfg.steps_nm
        for m in _method_samples(cfg, method)
    ]
    return _execute(tasks, cfg.jobs)


def run_convergence(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    """Volumes against sample count; nested direction sets by construction.

    Prefixes of one seeded direction stream are nested, so LP volumes are
    non-decreasing and half-space volumes non-increasing along the sweep.
    """
    tasks = [
        (method, cfg.phi_illuminant, cfg.psi_illuminant, grey, step, m, cfg.seed)
        for method in cfg.methods
        for grey in cfg.greys
        for step in cfg.steps_nm
        for m in sorted(_method_samples(cfg, method))
    ]
    return _execute(tasks, cfg.jobs)


def run_comparison(
    cfg: ExperimentConfig,
) -> tuple[list[ExperimentRecord], list[dict]]:
    """Baseline vs LP vs half-space volumes with containment checks."""
    methods = cfg.methods
    if set(methods) == {"lp-orthonormal"}:  # bare default: full comparison
        methods = ("baseline", "lp-orthonormal", "halfspace-orthonormal")
    tasks = [
        (method, cfg.phi_illuminant, cfg.psi_illuminant, grey, step, m, cfg.seed)
        for grey in cfg.greys
        for step in cfg.steps_nm
        for method in methods
        for m in _method_samples(cfg, method)
    ]
    records = _execute(tasks, cfg.jobs)

    checks = []
    for grey in cfg.greys:
        for step in cfg.steps_nm:
            cell = [r for r in records if r.grey == grey and r.step_nm == step]
            base = [r for r in cell if r.method == "baseline"]
            lps = [r for r in cell if r.method.startswith("lp")]
            halves = [r for r in cell if r.method.startswith("halfspace")]
            if not (base and lps):
                continue
            vol_base = max(r.volume for r in base)
            vol_lp = max(r.volume for r in lps)
            entry = {
                "grey": float(grey),
                "step_nm": float(step),
                "baseline_volume": vol_base,
                "lp_volume": vol_lp,
                "baseline_below_lp": bool(vol_base < vol_lp),
                "baseline_deficit": float(1.0 - vol_base / vol_lp),
            }
            if halves:
                vol_half = min(r.volume for r in halves)
                entry["halfspace_volume"] = vol_half
                entry["lp_within_halfspace"] = bool(vol_lp <= vol_half + 1e-9)
            checks.append(entry)
    return records, checks


def export_mesh(record: ExperimentRecord, path: str | Path) -> Path:
    """Write the record's hull as an OBJ triangle mesh (1-based indices)."""
    if record.hull is None:
        raise ValueError("record carries no hull to export")
    return _write_obj(record.hull, path)


def _write_obj(hull: Hull3, path: str | Path) -> Path:
    path = Path(path)
    lines = []
    for v in hull.vertices:
        lines.append(f"v {v[0]!r} {v[1]!r} {v[2]!r}")
    for f in hull.faces:
        lines.append(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_obj(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read back vertices and 0-based triangle indices from an OBJ file."""
    verts, faces = [], []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            faces.append([int(x.split("/")[0]) - 1 for x in parts[1:4]])
    return np.asarray(verts, dtype=float), np.asarray(faces, dtype=np.intp)


def write_outputs(
    out_dir: str | Path,
    cfg: ExperimentConfig,
    records: list[ExperimentRecord],
    checks: Optional[list[dict]] = None,
    meshes: bool = True,
) -> Path:
    """Emit results.json, results.csv, meshes/ and the timings sidecar."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if meshes:
        mesh_dir = out / "meshes"
        mesh_dir.mkdir(exist_ok=True)
        for i, rec in enumerate(records):
            name = f"{i:03d}_{rec.method}.obj"
            _write_obj(rec.hull, mesh_dir / name)
            rec.mesh = f"meshes/{name}"

    payload = {"config": cfg.echo(), "records": [r.as_dict() for r in records]}
    if checks is not None:
        payload["checks"] = checks
    (out / "results.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )

    cols = ["method", "phi_illuminant", "psi_illuminant", "grey", "step_nm", "samples", "volume"]
    rows = [",".join(cols)]
    for rec in records:
        d = rec.as_dict()
        rows.append(",".join(repr(d[c]) if isinstance(d[c], float) else str(d[c]) for c in cols))
    (out / "results.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    timing_rows = ["index,method,samples,elapsed_s"]
    for i, rec in enumerate(records):
        timing_rows.append(f"{i},{rec.method},{rec.samples},{rec.elapsed_s:.6f}")
    (out / "timings.csv").write_text("\n".join(timing_rows) + "\n", encoding="utf-8")
    return out


def recomputed_mesh_volume(path: str | Path) -> float:
    """Hull volume recomputed from an exported mesh's vertices."""
    verts, _ = load_obj(path)
    return volume(convex_hull(verts))
