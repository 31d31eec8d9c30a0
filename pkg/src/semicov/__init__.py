"""Semicontinuous covariance kernels for Gaussian random walks.

The package covers the pipeline from kernel definition to Monte Carlo
experiments: covariance families with jump discontinuities, Fisher
information and optimal designs under correlated errors, seeded path
simulation, an autocorrelation residual statistic, conditional
forecasting, and ruin probability estimation. The ``semicov`` console
script exposes every stage as a subcommand.
"""

from .errors import (
    DegenerateSeriesError,
    DimensionMismatchError,
    InfeasibleDesignError,
    InvalidParameterError,
    MismatchedConfigurationError,
    NotPositiveDefiniteError,
    SemicovError,
    SingularMatrixError,
)
from .kernels import (
    AbcReport,
    Family,
    Kernel,
    from_config,
    from_mapping,
    jump_lags,
    lag0_variance,
    multi_jump_exp,
    nather_linear,
    no_nugget_counterpart,
    nugget_ou,
    ou,
    power_exp,
    psi_of,
    step,
    to_mapping,
    validate_abc,
    variogram,
    variogram_exponential,
    variogram_linear,
    variogram_spherical,
)
from .matalg import (
    CovMatrix,
    Design,
    build,
    chol_lower,
    cov_to_csv,
    eig_extremes,
    ou_tridiag_inverse,
)
from .fisher import (
    FisherReport,
    bounds,
    cov_derivative_r,
    effectiveness,
    m_r,
    m_r_ou,
    m_theta,
    m_theta_ou,
    m_theta_ou_equispaced,
    m_theta_two_point_variogram,
    report,
)
from .design import (
    Criterion,
    ProductReference,
    SearchResult,
    geometric_progressive,
    product_design,
    psi_budget,
    search,
)
from .simulate import (
    JumpComparison,
    PathEnsemble,
    compare_nugget_vs_jumps,
    correlated_cholesky,
    sample_increments,
)
from .acftest import (
    CLaw,
    ResidualStat,
    Table1Row,
    TSample,
    empirical_acf,
    sum_of_residuals,
    t_distribution_mc,
    table1_experiment,
    theoretical_acf,
)
from .forecast import ForecastResult, conditional_forecast, conditional_tail_increments
from .ruin import RuinEstimate, conditional_ruin, ruin_probability, ruin_quotient

__version__ = "0.1.0"

__all__ = [
    "AbcReport",
    "CLaw",
    "CovMatrix",
    "Criterion",
    "DegenerateSeriesError",
    "Design",
    "DimensionMismatchError",
    "Family",
    "FisherReport",
    "ForecastResult",
    "InfeasibleDesignError",
    "InvalidParameterError",
    "JumpComparison",
    "Kernel",
    "MismatchedConfigurationError",
    "NotPositiveDefiniteError",
    "PathEnsemble",
    "ProductReference",
    "ResidualStat",
    "RuinEstimate",
    "SearchResult",
    "SemicovError",
    "SingularMatrixError",
    "TSample",
    "Table1Row",
    "bounds",
    "build",
    "chol_lower",
    "compare_nugget_vs_jumps",
    "conditional_forecast",
    "conditional_ruin",
    "conditional_tail_increments",
    "correlated_cholesky",
    "cov_derivative_r",
    "cov_to_csv",
    "effectiveness",
    "eig_extremes",
    "empirical_acf",
    "from_config",
    "from_mapping",
    "geometric_progressive",
    "jump_lags",
    "lag0_variance",
    "m_r",
    "m_r_ou",
    "m_theta",
    "m_theta_ou",
    "m_theta_ou_equispaced",
    "m_theta_two_point_variogram",
    "multi_jump_exp",
    "nather_linear",
    "no_nugget_counterpart",
    "nugget_ou",
    "ou",
    "ou_tridiag_inverse",
    "power_exp",
    "product_design",
    "psi_budget",
    "psi_of",
    "report",
    "ruin_probability",
    "ruin_quotient",
    "sample_increments",
    "search",
    "step",
    "sum_of_residuals",
    "t_distribution_mc",
    "table1_experiment",
    "theoretical_acf",
    "to_mapping",
    "validate_abc",
    "variogram",
    "variogram_exponential",
    "variogram_linear",
    "variogram_spherical",
]
