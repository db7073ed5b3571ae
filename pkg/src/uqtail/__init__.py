"""Exact stationary tail asymptotics for queues with an unreliable server.

Two models are covered: a single M/M/1-type queue whose server alternates
between Up and Down states, and a two-station tandem whose first server is
unreliable, with feedback routing.  The package computes the geometric decay
rate and the closed-form tail prefactors, cross-checked by matrix-geometric
solves, truncated sparse solves, and simulation.
"""

from .params import (DOWN, UP, InvalidParameters, InvalidState, Model,
                     ModelParams, UnstableParameters, default_uniformization,
                     make_params, params_from_dict, params_from_json)
from .kernels import TransitionRow, free_kernel, full_kernel, rs_rd_kernel
from .spectral import (SpectralSolution, StabilityReport, characteristic_roots,
                       feynman_kac, stability)
from .twist import (Drift, HarmonicFunction, ProductFormPhi, TwistRates,
                    TwistSummary, harmonic, horizontal_drift,
                    markov_part_stationary, model2_twist_rates, twisted_kernel,
                    twist_summary)
from .qbd import (ConvergenceError, QbdBlocks, RateMatrixSolution,
                  StationaryTable, TruncationError, boundary_vector,
                  exact_stationary_model1, neuts_stability, qbd_blocks,
                  rate_matrix_closed_form, rate_matrix_iterate,
                  rate_matrix_spectrum, truncated_stationary)
from .asymptotics import (AlphaLimits, EscapeProbs, EtaEstimate, Mm1Comparison,
                          TailAsymptotic, TailFit, TwoGeometricFit, TwoTermFit,
                          alpha_limits, escape_probabilities, eta,
                          mm1_comparison, prefactors, rs_rd_stationary,
                          tail_fit, two_geometric_fit, two_term_tail)
from .simulate import (EmpiricalDistribution, Excursion, Trajectory,
                       empirical_distribution, excursion_verdict, ld_excursions,
                       regime_prediction, simulate)
from .verify import CheckResult, run_checks

__version__ = "0.1.0"

__all__ = [
    "DOWN", "UP", "Model", "ModelParams", "InvalidParameters", "InvalidState",
    "UnstableParameters", "default_uniformization", "make_params",
    "params_from_dict", "params_from_json",
    "TransitionRow", "free_kernel", "full_kernel", "rs_rd_kernel",
    "SpectralSolution", "StabilityReport", "characteristic_roots",
    "feynman_kac", "stability",
    "Drift", "HarmonicFunction", "ProductFormPhi", "TwistRates", "TwistSummary",
    "harmonic", "horizontal_drift", "markov_part_stationary",
    "model2_twist_rates", "twisted_kernel", "twist_summary",
    "ConvergenceError", "QbdBlocks", "RateMatrixSolution", "StationaryTable",
    "TruncationError", "boundary_vector", "exact_stationary_model1",
    "neuts_stability", "qbd_blocks", "rate_matrix_closed_form",
    "rate_matrix_iterate", "rate_matrix_spectrum", "truncated_stationary",
    "AlphaLimits", "EscapeProbs", "EtaEstimate", "Mm1Comparison",
    "TailAsymptotic", "TailFit", "TwoGeometricFit", "TwoTermFit",
    "alpha_limits", "escape_probabilities", "eta", "mm1_comparison",
    "prefactors", "rs_rd_stationary", "tail_fit", "two_geometric_fit",
    "two_term_tail",
    "EmpiricalDistribution", "Excursion", "Trajectory",
    "empirical_distribution", "excursion_verdict", "ld_excursions",
    "regime_prediction", "simulate",
    "CheckResult", "run_checks",
]
