"""Closed-form moment-type estimators for Dirichlet and multivariate
Gamma families, with analytic asymptotic variance-covariance matrices
and a Monte Carlo benchmarking harness."""

from momentfit.specialfn import (
    ln_gamma,
    digamma,
    polygamma,
    digamma_diff,
    polygamma_diff,
)
from momentfit.model import (
    DirichletParams,
    MGammaParams,
    RngSpec,
    SampleMatrix,
    SupportError,
    delta_transform,
    dirichlet_projection,
    log_density_dirichlet,
    log_density_mgamma,
    log_partition,
    sample_dirichlet,
    sample_mgamma,
    sufficient_stats,
)
from momentfit.moments import (
    CatalogError,
    MomentId,
    covariance_ids,
    dirichlet_covariance,
    dirichlet_raw_moment,
    has_printed_form,
    mc_moment_estimate,
    mgamma_covariance,
    mgamma_raw_moment,
    moment_value,
    printed_value,
    raw_moment_ids,
)
from momentfit.estimators import (
    ESTIMATOR_TAGS,
    EstimateReport,
    SolverConfig,
    dirichlet_me,
    dirichlet_mle,
    dirichlet_same,
    estimate,
    mgamma_dirichlet_based,
    mgamma_me,
    mgamma_mle,
    mgamma_same,
)
from momentfit.avar import AvarMatrix, GVParts, avar_matrix
from momentfit.montecarlo import (
    InsufficientDataError,
    MetricsRow,
    SweepConfig,
    empirical_sampling_covariance,
    run_avar_sweep,
    run_metric_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "AvarMatrix",
    "CatalogError",
    "DirichletParams",
    "ESTIMATOR_TAGS",
    "EstimateReport",
    "GVParts",
    "InsufficientDataError",
    "MGammaParams",
    "MetricsRow",
    "MomentId",
    "RngSpec",
    "SampleMatrix",
    "SolverConfig",
    "SupportError",
    "SweepConfig",
    "avar_matrix",
    "covariance_ids",
    "delta_transform",
    "digamma",
    "digamma_diff",
    "dirichlet_covariance",
    "dirichlet_me",
    "dirichlet_mle",
    "dirichlet_projection",
    "dirichlet_raw_moment",
    "dirichlet_same",
    "empirical_sampling_covariance",
    "estimate",
    "has_printed_form",
    "ln_gamma",
    "log_density_dirichlet",
    "log_density_mgamma",
    "log_partition",
    "mc_moment_estimate",
    "mgamma_covariance",
    "mgamma_dirichlet_based",
    "mgamma_me",
    "mgamma_mle",
    "mgamma_raw_moment",
    "mgamma_same",
    "moment_value",
    "polygamma",
    "polygamma_diff",
    "printed_value",
    "raw_moment_ids",
    "run_avar_sweep",
    "run_metric_sweep",
    "sample_dirichlet",
    "sample_mgamma",
    "sufficient_stats",
]
