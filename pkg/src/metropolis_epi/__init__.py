"""Metropolis samplers for logistic case-control posteriors.

Random-walk, guided, and guided-adaptive Metropolis chains, chain
diagnostics (autocorrelation, effective sample size, Monte Carlo error),
and epidemiologic post-processing (odds ratios, incidence-calibrated risk
differences, maximum likelihood and bootstrap comparators).
"""

from ._backend import HAVE_COMPILED
from .diagnostics import (
    PosteriorSummary,
    autocorrelation,
    effective_sample_size,
    map_estimate,
    mc_standard_error,
    summarize,
)
from .errors import (
    CalibrationRangeError,
    ConfigError,
    DataError,
    DegenerateSeriesError,
    MetropolisError,
    NumericalError,
    SeparationError,
)
from .estimands import (
    TwoByTwo,
    bootstrap_mle,
    calibrate_offset,
    mle_2x2,
    odds_ratio_summary,
    rd_posterior,
    risk_difference,
)
from .sampler import (
    Chain,
    ChainState,
    SamplerConfig,
    Variant,
    adapt_covariance,
    log_acceptance,
    metropolis_step,
    propose,
    run_chain,
    two_state_chain,
)
from .target import Dataset, Flat, LogisticPosterior, Normal, Prior, expit, log_likelihood, log_posterior, log_prior

__version__ = "0.1.0"
