"""Lacunary gap series, stopping-time damping and their harmonic extensions."""

from .assembly import AssemblyReport, LayerCheck, assemble_counterexample
from .plan import LacunaryPlan, gen_lacunary, growth_bound
from .series import (DampingState, DivergenceReport, MaximalReport, QuasiResult, build_damping,
                     damping_factor, discrete_lipschitz, divergence_statistics, maximal_stats,
                     quasi_orthogonality)
from .waves import (BoundaryWave, CoefficientSequence, check_coefficients, cosine_wave,
                    divergent_coefficients, positive_coefficients, trace_wave, triangle_wave)

__all__ = [
    "AssemblyReport", "LayerCheck", "assemble_counterexample",
    "LacunaryPlan", "gen_lacunary", "growth_bound",
    "DampingState", "DivergenceReport", "MaximalReport", "QuasiResult", "build_damping",
    "damping_factor", "discrete_lipschitz", "divergence_statistics", "maximal_stats",
    "quasi_orthogonality",
    "BoundaryWave", "CoefficientSequence", "check_coefficients", "cosine_wave",
    "divergent_coefficients", "positive_coefficients", "trace_wave", "triangle_wave",
]
