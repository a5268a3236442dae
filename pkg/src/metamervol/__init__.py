"""Object colour solids and theoretically maximal metamer mismatch volumes.

Boundaries of object colour solids are parametrised by spherically sampled
unit directions; mismatch volumes come either from repeated linear programs
over those directions or, optimisation-free, from slicing a half-space
representation of the 6-D stacked solid.  A 5-transition step-function
baseline is included for comparison.
"""

from .spectral import (
    ColourSystem,
    GridMismatchError,
    RangeError,
    RankDeficientError,
    Reflectance,
    SpectralDataError,
    Spectrum,
    WavelengthGrid,
    load_spectral_table,
    make_colour_system,
    orthonormalize,
    resample,
    respond,
    stack,
)
from .datasets import CANONICAL_GRID, ILLUMINANTS, colour_system, load_cmfs, load_illuminant
from .sphere import DirectionSet, sample_sphere, sample_sphere_range
from .ocs import (
    BoundarySample,
    HalfspaceRep,
    build_boundary,
    build_halfspace_rep,
    count_transitions,
    optimal_reflectance,
)
from .geometry import (
    FlatHullError,
    Halfspace3,
    Hull3,
    InfeasibleRegionError,
    UnboundedRegionError,
    convex_hull,
    halfspace_intersection,
    interior_point,
    volume,
)
from .lp import BoxedLp, LpSolution, feasible_point, solve, solve_many
from .mmv import (
    DegenerateSliceError,
    InfeasibleTargetError,
    MismatchProblem,
    MmvResult,
    classify_transitions,
    grey_problem,
    mmv_halfspace,
    mmv_lp,
)
from .fivetransition import (
    DegenerateBaselineError,
    StepSpectrum,
    baseline_mmv,
    evaluate,
    evaluate_fractional,
    fit_to_target,
)

__version__ = "0.1.0"
