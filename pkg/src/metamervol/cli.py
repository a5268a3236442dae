"""Command-line driver for the experiment runners.

Subcommands mirror the experiment set: resolution-sweep, convergence,
compare, export-mesh.  Exit codes: 0 success, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import (
    METHODS,
    ExperimentConfig,
    export_mesh,
    run_comparison,
    run_convergence,
    run_resolution_sweep,
    run_single,
    write_outputs,
)
from .fivetransition import DegenerateBaselineError
from .geometry import FlatHullError, InfeasibleRegionError, UnboundedRegionError
from .lp import InfeasibleSystemError, NumericalLpError
from .mmv import DegenerateSliceError, InfeasibleTargetError
from .spectral import RangeError, RankDeficientError, SpectralDataError

_CONFIG_ERRORS = (ValueError, KeyError, OSError, SpectralDataError, RangeError)
_NUMERICAL_ERRORS = (
    NumericalLpError,
    InfeasibleSystemError,
    InfeasibleTargetError,
    DegenerateSliceError,
    DegenerateBaselineError,
    FlatHullError,
    InfeasibleRegionError,
    UnboundedRegionError,
    RankDeficientError,
)


def _add_common(p: argparse.ArgumentParser, default_methods: tuple[str, ...]):
    p.add_argument("--phi-illuminant", required=True, help="first illuminant (D65/A/F11)")
    p.add_argument("--psi-illuminant", required=True, help="second illuminant (D65/A/F11)")
    p.add_argument(
        "--grey", type=float, action="append", default=None,
        help="flat grey level in (0,1); repeatable (default 0.5)",
    )
    p.add_argument(
        "--step-nm", type=float, action="append", default=None,
        help="wavelength step in nm; repeatable (default 1)",
    )
    p.add_argument(
        "--samples", type=int, action="append", default=None,
        help="direction / seed count; repeatable (default 1000)",
    )
    p.add_argument(
        "--halfspace-samples", type=int, action="append", default=None,
        help="direction count for half-space methods (default 1000000)",
    )
    p.add_argument(
        "--method", action="append", choices=METHODS, default=None,
        help=f"repeatable; default {default_methods}",
    )
    p.add_argument("--seed", type=int, default=0, help="base RNG seed")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="concurrent runs")
    p.add_argument("--no-meshes", action="store_true", help="skip OBJ export")


def _config(args, default_methods: tuple[str, ...]) -> ExperimentConfig:
    return ExperimentConfig(
        phi_illuminant=args.phi_illuminant,
        psi_illuminant=args.psi_illuminant,
        greys=tuple(args.grey or (0.5,)),
        steps_nm=tuple(args.step_nm or (1.0,)),
        methods=tuple(args.method or default_methods),
        samples=tuple(args.samples or (1000,)),
        halfspace_samples=tuple(args.halfspace_samples or (1_000_000,)),
        seed=args.seed,
        out_dir=Path(args.out),
        jobs=args.jobs,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metamervol",
        description="Metamer mismatch volume experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("resolution-sweep", help="volumes across wavelength steps")
    _add_common(p, ("lp-orthonormal",))

    p = sub.add_parser("convergence", help="volumes against sample count")
    _add_common(p, ("lp-orthonormal", "halfspace-orthonormal"))

    p = sub.add_parser("compare", help="baseline vs LP vs half-space")
    _add_common(p, ("baseline", "lp-orthonormal", "halfspace-orthonormal"))

    p = sub.add_parser("export-mesh", help="compute one hull and write an OBJ file")
    p.add_argument("--phi-illuminant", required=True)
    p.add_argument("--psi-illuminant", required=True)
    p.add_argument("--grey", type=float, default=0.5)
    p.add_argument("--step-nm", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--method", choices=METHODS, default="lp-orthonormal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output OBJ path")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "export-mesh":
            record, _ = run_single(
                args.method,
                args.phi_illuminant,
                args.psi_illuminant,
                args.grey,
                args.step_nm,
                args.samples,
                args.seed,
            )
            export_mesh(record, args.out)
            return 0

        if args.command == "resolution-sweep":
            cfg = _config(args, ("lp-orthonormal",))
            records, checks = run_resolution_sweep(cfg), None
        elif args.command == "convergence":
            cfg = _config(args, ("lp-orthonormal", "halfspace-orthonormal"))
            records, checks = run_convergence(cfg), None
        else:
            cfg = _config(args, ("baseline", "lp-orthonormal", "halfspace-orthonormal"))
            records, checks = run_comparison(cfg)
        write_outputs(cfg.out_dir, cfg, records, checks, meshes=not args.no_meshes)
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except _CONFIG_ERRORS as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
