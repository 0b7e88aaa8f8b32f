"""Variational solver for tilted-norm p-Laplace equations on structured grids."""

from .diagnostics import (ConvexityReport, convexity_diagnostic, fit_decay, harnack_ratio,
                          monotonicity_defect, oscillation_profile)
from .engine import SolveInfo, SolverOptions, TiltedDensity, minimize
from .estimators import HomogeneityFit, PLaplaceSolver, fit_homogeneity, solve
from .experiments import (MartinResult, MeasureResult, PsiDiagnostics, build_psi,
                          harmonic_measure, martin_fit, measure_sweep, smooth_bump)
from .field import ScalarField, read_grid_dump, write_grid_dump, write_profile_csv
from .grids import SectorGrid, SlabGrid

__all__ = [
    "SlabGrid", "SectorGrid", "ScalarField", "SolverOptions", "SolveInfo", "TiltedDensity",
    "minimize", "PLaplaceSolver", "solve", "HomogeneityFit", "fit_homogeneity",
    "harmonic_measure", "measure_sweep", "martin_fit", "build_psi", "smooth_bump",
    "MeasureResult", "MartinResult", "PsiDiagnostics", "oscillation_profile",
    "monotonicity_defect", "fit_decay", "harnack_ratio", "convexity_diagnostic",
    "ConvexityReport", "write_grid_dump", "read_grid_dump", "write_profile_csv",
]
