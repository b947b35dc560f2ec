"""Outcome-adaptive lasso propensity-score estimation.

Penalized logistic propensity models with outcome-adaptive L1 weights and
an optional ridge term, normalized IPTW estimation of the average
treatment effect, and a seeded Monte Carlo harness for studying selection
behavior as dimensions grow with the sample size.
"""

__version__ = "0.1.0"

from ._backend import NUMBA_ENABLED, backend_name
from .estimators import AteEstimate, MethodSpec, fit_method, iptw_ate, selected_support, wamd
from .logistic import (
    Dataset,
    FisherInfo,
    fisher_information,
    neg_log_likelihood,
    phi,
    phi1,
    phi2,
    propensity,
    score,
)
from .simgen import Scenario, child_seed, generate_dataset, paper_scenario
from .solver import FitResult, PenaltySpec, fit, kkt_residual, penalized_objective, soft_threshold
from .weights import OlsFit, compute_weights, lambda_grid, lambda_schedule, ols_fit

__all__ = [
    "__version__",
    "NUMBA_ENABLED",
    "backend_name",
    "Dataset",
    "FisherInfo",
    "phi",
    "phi1",
    "phi2",
    "neg_log_likelihood",
    "score",
    "fisher_information",
    "propensity",
    "PenaltySpec",
    "FitResult",
    "soft_threshold",
    "penalized_objective",
    "kkt_residual",
    "fit",
    "OlsFit",
    "ols_fit",
    "compute_weights",
    "lambda_schedule",
    "lambda_grid",
    "MethodSpec",
    "AteEstimate",
    "selected_support",
    "wamd",
    "iptw_ate",
    "fit_method",
    "Scenario",
    "paper_scenario",
    "generate_dataset",
    "child_seed",
]
