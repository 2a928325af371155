"""Optimism of cross-validation under dependent observations.

Quantifies how far training-set and test-set errors fall below true
out-of-sample error when responses are correlated, via analytic covariance
penalties, closed-form special cases, dependency-respecting split schemes, and
Monte Carlo simulation.
"""

from .covariance import (
    AR1,
    Equicorrelated,
    GroupBlock,
    IID,
    PairedCross,
    ar1_autocovariance,
    materialize,
    validate,
)
from .designs import (
    DesignMatrix,
    hat_matrix,
    ols_fit,
    orthogonal_polynomial_features,
    reproduction_grid,
)
from .errors import (
    ConfigError,
    DegenerateInput,
    DimensionError,
    InvalidSpec,
    NotPositiveDefinite,
    OptcvError,
    SingularDesign,
)
from .evaluation import (
    Ar1Dgp,
    EstimateWithSE,
    FixedDesignDgp,
    KnnEstimator,
    Lag1Estimator,
    MengDecomposition,
    OlsEstimator,
    Scheme,
    SchemeComparison,
    compare_schemes,
    evaluate_split,
    mcnemar_test,
    meng_decomposition,
    scheme_kfold,
    scheme_leave_one_group_out,
    scheme_loo,
    scheme_network,
    scheme_non_dependent,
    scheme_temporal_block,
)
from .optimism import (
    ErrorDecomposition,
    MonteCarloErrors,
    analytic_decomposition,
    closed_form_ar1_knn_covariance,
    closed_form_equicorrelated_ols,
    monte_carlo_errors,
)
from .sampling import (
    DEFAULT_SEED,
    PairedDraw,
    SeededStream,
    sample_ar1,
    sample_mvn,
    sample_paired,
)
from .smoothers import (
    LinearSmoother,
    apply_smoother,
    degrees_of_freedom,
    knn_smoother,
    ols_smoother,
)
from .splitters import (
    DependencyMetadata,
    SplitPlan,
    kfold,
    leave_one_group_out,
    network_neighborhood_split,
    non_dependent_cv,
    temporal_block,
)

__version__ = "0.1.0"
