"""Quadratic envelopes of sparsity penalties.

The envelope Q_gamma(f) is the double negated-Moreau transform of f. It is
the largest function below f that agrees with f after adding gamma/2 times a
squared distance and taking a convex hull, which makes it a nonconvex but
computable surrogate: minimizers are preserved for gamma above the squared
operator norm, and the composite problem becomes convex for gamma below the
smallest squared singular value.

The package provides closed forms for cardinality and k-sparsity penalties,
a supergradient ascent engine for penalties that only expose a prox, grid
oracles for validation, a spectral lift to matrices, forward-backward
solvers, and a sparse recovery experiment.
"""

from .envelope import (AscentOptions, AscentResult, QuadEnvelope,
                       double_transform_ascent, lasry_lions_eval,
                       q_transform_eval_engine, s_transform_eval)
from .experiments import (ExperimentConfig, ExperimentRow, match_rate,
                          mean_distances, recovered_support, rows_to_csv,
                          run_fig4)
from .gridoracle import (CurvatureReport, GridFunction, SupportEnumSpec,
                         brute_force_global_min, curvature_check,
                         grid_convex_envelope, grid_legendre,
                         grid_quad_envelope, sample_penalty)
from .io import (load_problem, read_matrix, read_vector, resolve_gamma,
                 write_matrix, write_vector)
from .kernels import BACKEND
from .penalty import (CardPenalty, L1Penalty, SquaredNormPenalty,
                      TopKIndicator, ZeroPenalty, card_prox, l1_prox,
                      penalty_from_json, penalty_to_json, q_card_eval,
                      q_card_prox, q_topk_eval, topk_prox)
from .solver import (Problem, Regime, SolveResult, SolverOptions,
                     classify_regime, fbs_multistart, fbs_solve, ista_solve,
                     oracle_solution, power_iteration)
from .spectral import (SpectralPenalty, q_spectral_eval, spectral_eval,
                       spectral_prox)
from .verify import VerifyResult, run_suites, suite_names

__version__ = "0.1.0"

__all__ = [
    "AscentOptions", "AscentResult", "QuadEnvelope", "double_transform_ascent",
    "lasry_lions_eval", "q_transform_eval_engine", "s_transform_eval",
    "ExperimentConfig", "ExperimentRow", "match_rate", "mean_distances",
    "recovered_support", "rows_to_csv", "run_fig4",
    "CurvatureReport", "GridFunction", "SupportEnumSpec",
    "brute_force_global_min", "curvature_check", "grid_convex_envelope",
    "grid_legendre", "grid_quad_envelope", "sample_penalty",
    "load_problem", "read_matrix", "read_vector", "resolve_gamma",
    "write_matrix", "write_vector",
    "BACKEND",
    "CardPenalty", "L1Penalty", "SquaredNormPenalty", "TopKIndicator",
    "ZeroPenalty", "card_prox", "l1_prox", "penalty_from_json",
    "penalty_to_json", "q_card_eval", "q_card_prox", "q_topk_eval", "topk_prox",
    "Problem", "Regime", "SolveResult", "SolverOptions", "classify_regime",
    "fbs_multistart", "fbs_solve", "ista_solve", "oracle_solution",
    "power_iteration",
    "SpectralPenalty", "q_spectral_eval", "spectral_eval", "spectral_prox",
    "VerifyResult", "run_suites", "suite_names",
    "__version__",
]
