"""Harmonic-average finite differences for elliptic interface problems."""

from .analysis import (
    RefinementTable,
    TruncationReport,
    infinity_error,
    refinement_study,
    truncation_errors,
)
from .averaging import (
    AveragingPolicy,
    harmonic_average_interval,
    harmonic_averages,
    interface_average,
)
from .estimators import HarmonicAverageSolver1D, HarmonicAverageSolver2D
from .exprlang import Expr, evaluate, parse, unparse
from .fd1d import (
    Grid1D,
    IrregularPair,
    TridiagonalSystem,
    assemble1d,
    correction_terms,
    is_m_matrix,
    locate_interface,
    solve1d,
    thomas_solve,
)
from .fd2d import Grid2D, SparseSystem, assemble2d, direct_solve2d, solve2d, solve_interface2d
from .greens import GreensFunction, cancellation_bound, eval_green, reproduction_check
from .problem import (
    DeltaForm,
    InterfaceProblem1D,
    InterfaceProblem2D,
    JumpForm,
    ManufacturedCase,
    PiecewiseField,
    catalog_case,
    jumps_from_delta,
    list_cases,
    validate,
)

__version__ = "0.1.0"
