"""Multi-stage screening with noisy tests: posterior laws, dominance checks and a Monte Carlo oracle."""

from .analysis import (
    ConvergenceCurve,
    Distinctness,
    DominanceReport,
    Verdict,
    check_fosd,
    classify_distinctness,
    convergence_curve,
    find_density_crossings,
    kolmogorov_distance,
    noise_support_bound,
)
from .distributions import (
    BoundedDistribution,
    DistributionError,
    NoiseSpec,
    from_literal,
    make_piecewise_linear,
    make_uniform,
    mean,
    quantile_upper,
    survivor,
    uniform_noise,
)
from .montecarlo import InsufficientAcceptance, MCConfig, MCEstimate, cross_validate, simulate
from .screening import (
    FactorizedPosterior,
    NormalizationDrift,
    ScreeningError,
    ScreeningProblem,
    ThresholdStrategy,
    ZeroCapacity,
    perfect_screening_target,
    posterior_to_distribution,
    run_limit_truncation,
    run_strategy,
    solve_fixed_capacity,
    solve_fixed_threshold,
    solve_strategy,
)

__version__ = "0.1.0"
