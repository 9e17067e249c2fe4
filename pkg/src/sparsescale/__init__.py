"""Scale-aware hard thresholding for sparse Gaussian sequence estimation.

Thresholds, rate functions and lower bounds for the class of s-sparse
vectors whose nonzero entries have magnitude at least a, Bayes-rule oracles
for the lower bounds, and a reproducible Monte Carlo harness.
"""

from .bayes import (
    BayesRuleEval,
    TwoPointPrior,
    bayes_rule,
    component_bayes_risk,
    gaussian_prior_component_risk,
    matched_threshold,
    verify_lower_bound,
)
from .estimators import (
    AdaptiveHardThreshold,
    OracleSupport,
    ScaledHardThreshold,
    UniversalHardThreshold,
    estimate,
    support_of,
)
from .exceptions import InvalidInputError, NumericalFailureError, OutOfRangeError
from .gaussian import abs_moment_q, integrate, std_upper_tail, tail_sandwich
from .montecarlo import RiskEstimate, empirical_risk, exact_recovery_curve, sweep
from .problem import (
    IDENTITY,
    DesignSpec,
    NoisyObservation,
    ProblemConfig,
    SparseSignal,
    check_membership,
    sample_observation,
    worst_case_signal,
)
from .rates import (
    RegimeLabel,
    a_eps,
    epsilon_of_a,
    phi,
    phi_ad,
    phi_o,
    phi_plus,
    psi,
    psi_general,
    psi_plus,
    rate_report,
    regime_of,
    t_star,
    threshold_t,
)

__version__ = "0.1.0"
