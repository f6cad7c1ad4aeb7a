"""hmmar: hidden-state estimation for Markov-switching AR(p) observation models.

The hidden state of a finite Markov chain drives the coefficients of an
autoregressive observation process.  This package simulates such models and
estimates the hidden state two ways: the optimal Bayes filter/predictor when
the transition matrix is known, and a nonparametric filter/predictor (kernel
conditional-density estimate projected onto the emission mixture via a
simplex-constrained QP) when it is not.  A Monte-Carlo harness compares the
two on repeated experiments.
"""

from .filters import (EstimatorOutput, FilterState, StepRecord,
                      nonparametric_step, optimal_step, posterior_update,
                      run_filters, warmup_threshold)
from .gaussian import Gaussian1, emission_density, normal_pdf, product_integral
from .harness import (ConfigError, ErrorStat, ErrorSummary, ExperimentConfig,
                      config_from_dict, emit_trace, example_config,
                      example_config_path, load_config, run_experiment)
from .kde import (Bandwidth, EmbeddedSample, conditional_weights, embed,
                  kde_eval, oversmoothed_bandwidth, ucv_bandwidth, ucv_objective)
from .model import (ArStateParams, SwitchingArModel, Trajectory,
                    TransitionMatrix, model_from_dict, simulate,
                    stationary_distribution)
from .simplex_qp import (QpProblem, SimplexPoint, brute_force_solve,
                         is_positive_definite, objective, solve_kkt)

__version__ = "0.1.0"

__all__ = [
    "ArStateParams", "Bandwidth", "ConfigError", "EmbeddedSample",
    "ErrorStat", "ErrorSummary", "EstimatorOutput", "ExperimentConfig",
    "FilterState", "Gaussian1", "QpProblem", "SimplexPoint", "StepRecord",
    "SwitchingArModel", "Trajectory", "TransitionMatrix",
    "brute_force_solve", "conditional_weights", "config_from_dict",
    "embed", "emission_density", "emit_trace", "example_config",
    "example_config_path", "is_positive_definite", "kde_eval",
    "load_config", "model_from_dict", "nonparametric_step", "normal_pdf",
    "objective", "optimal_step", "oversmoothed_bandwidth",
    "posterior_update", "product_integral", "run_experiment", "run_filters",
    "simulate", "solve_kkt", "stationary_distribution", "ucv_bandwidth",
    "ucv_objective", "warmup_threshold",
]
