"""Exponents, profile calculus, tilted norms, a p-Laplace solver and gap series
for positive p-harmonic functions vanishing on a k-plane."""

from importlib import metadata as _metadata

from .errors import (DegenerateFitError, DegenerateGradientError, FatouKitError,
                     MissingArtifactError, NonConvergenceError, NotFoundError, PlanOverflowError,
                     RegimeError, ResolutionError, StepTooLargeError, ThresholdLogicError)
from .exponents import (CoefficientTriple, ExponentSet, Geometry, capacity_energy,
                        coefficient_roots, coefficients, compute_exponents,
                        martin_exponent_halfplane)
from .profiles import (Classification, RadialProfile, classify, divergence_st,
                       fd_divergence_oracle, gradient_st, hessian_st, oracle_discrepancy,
                       quartic_coefficients)
from .tilted import (AHarmonicProfile, ETerms, ThresholdReport, TiltedNorm, baseline_sign_sum,
                     delta_for_target, divergence_tilted, fd_tilted_oracle,
                     grid_subsolution_check, halfspace_w_derivatives, halfspace_w_functions,
                     lemma616_scan, measured_threshold, n0_derivative_bound, q_calculus,
                     subsolution_threshold, w_grid)

try:
    __version__ = _metadata.version("artifact")
except _metadata.PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"
