"""Block bootstrap distribution estimation for sample quantiles of dependent data.

The package simulates stationary weakly dependent test processes, resamples
them with a block bootstrap whose number of blocks ranges from a single block
(subsampling) to ``floor(n / block_length)`` (the moving block bootstrap),
estimates the sampling distribution of centered, scaled sample quantiles,
selects the number and length of blocks from the data, and reproduces the
associated Monte Carlo experiments at configurable scale.
"""

__version__ = "0.1.0"

from .empirical import (
    WeightedSample,
    block_averaged_cdf,
    block_averaged_quantile,
    block_weighted_sample,
    block_weights,
    empirical_cdf,
    order_stat_index,
    sample_quantile,
)
from .estimators import CiResult, cdf_deviation_prob, lower_confidence_bound, quantile_deviation_prob
from .models import (
    MODEL_NAMES,
    ModelSpec,
    TimeSeries,
    arma11_model,
    constant_model,
    model_from_name,
    poly_mixing_model,
    simulate,
    simulate_arma11,
    simulate_batch,
    simulate_poly_mixing,
    simulate_squared_arma23,
    squared_arma23_model,
    standard_normal_stream,
)
from .resample import (
    BlockPlan,
    EmpiricalDistribution,
    ResamplePlan,
    ResourceLimitError,
    bootstrap_quantile_distribution,
    cdf_statistic,
    draw_block_starts,
    exact_quantile_distribution,
    paste_blocks,
    quantile_statistic,
)
from .seeding import float_key, subseed, substream
from .tuning import (
    NoFeasiblePlanError,
    SelectionResult,
    TuneConfig,
    plan_from_constants,
    select_plan,
    subsample_starts,
    tuning_error,
)

__all__ = [
    "__version__",
    "BlockPlan",
    "CiResult",
    "EmpiricalDistribution",
    "MODEL_NAMES",
    "ModelSpec",
    "NoFeasiblePlanError",
    "ResamplePlan",
    "ResourceLimitError",
    "SelectionResult",
    "TimeSeries",
    "TuneConfig",
    "WeightedSample",
    "arma11_model",
    "block_averaged_cdf",
    "block_averaged_quantile",
    "block_weighted_sample",
    "block_weights",
    "bootstrap_quantile_distribution",
    "cdf_deviation_prob",
    "cdf_statistic",
    "constant_model",
    "draw_block_starts",
    "empirical_cdf",
    "exact_quantile_distribution",
    "float_key",
    "lower_confidence_bound",
    "model_from_name",
    "order_stat_index",
    "paste_blocks",
    "plan_from_constants",
    "poly_mixing_model",
    "quantile_deviation_prob",
    "quantile_statistic",
    "sample_quantile",
    "select_plan",
    "simulate",
    "simulate_arma11",
    "simulate_batch",
    "simulate_poly_mixing",
    "simulate_squared_arma23",
    "squared_arma23_model",
    "standard_normal_stream",
    "subseed",
    "subsample_starts",
    "substream",
    "tuning_error",
]
