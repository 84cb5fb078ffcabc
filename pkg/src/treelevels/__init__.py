"""Level profiles of random recursive trees, their branching-process
embedding, exact moment formulas, and the limiting Gaussian process, with
statistical suites that verify the asymptotic theory at desk scale."""

from .branching import (
    GenerationCounts,
    InterarrivalSpec,
    RenewalPath,
    mean_birth_time,
    simulate_cmj,
    simulate_cmj_until_n_births,
    simulate_renewal,
)
from .errors import (
    ConditioningError,
    ConfigError,
    ResourceBudgetError,
    TreelevelsError,
)
from .limits import (
    GridSpec,
    KernelMatrix,
    limit_covariance,
    sample_kernel,
    sample_pathwise,
    stationary_covariance,
)
from .moments import (
    LogValue,
    adaptive_simpson,
    count_variance,
    expected_count,
    fluctuation_leading_term,
    fluctuation_second_moment,
    stirling_bound_margin,
    tail_coefficient,
    variance_decomposition_residual,
)
from .suites import ExperimentConfig, SuiteResult, list_suites, run_suite
from .trees import (
    LevelProfile,
    TreeConfig,
    enumerate_exact_distribution,
    exact_mean_profile,
    generate_profile,
    level_counts_batch,
)
from .verify import (
    CovarianceEstimate,
    NormalizedSample,
    TestReport,
    empirical_cov,
    ks_one_sample,
    ks_two_sample,
    multivariate_target_cov,
    normalize_fixed_k,
    normalize_intermediate,
    normalize_multivariate,
    renewal_statistic,
    renewal_sum,
)

__version__ = "0.1.0"
