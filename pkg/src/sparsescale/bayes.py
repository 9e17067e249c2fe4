"""Per-coordinate Bayes rules and Bayes risks under two-point and Gaussian priors.

The coordinate model is Z = a * eta + sigma * eps with eta ~ Bernoulli(rho).
The rule T(z) in [0, 1] estimates eta; its loss is a^q |T - eta|^q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Union

import numpy as np
from scipy.special import expit

from .exceptions import InvalidInputError
from .gaussian import abs_moment_q, integrate, normal_pdf, std_upper_tail
from .problem import ProblemConfig, check_scale
from .rates import lower_bound_recovery, threshold_t

__all__ = [
    "TwoPointPrior",
    "BayesRuleEval",
    "LowerBoundCheck",
    "LOGISTIC",
    "INDICATOR",
    "bayes_rule",
    "component_bayes_risk",
    "indicator_risk",
    "matched_threshold",
    "best_indicator_threshold",
    "verify_lower_bound",
    "gaussian_prior_component_risk",
]

LOGISTIC = "logistic"
INDICATOR = "indicator"
_SATURATION = 700.0
RISK_TOL = 1e-9
DOMINANCE_SLACK = 1e-6


@dataclass(frozen=True)
class TwoPointPrior:
    """Coordinate equals ``a`` with probability ``rho`` and 0 otherwise."""

    a: float
    rho: float

    def __post_init__(self):
        object.__setattr__(self, "a", check_scale(self.a))
        rho = float(self.rho)
        if not 0.0 < rho < 1.0:
            raise InvalidInputError(f"rho must lie in (0, 1), got {self.rho!r}")
        object.__setattr__(self, "rho", rho)


@dataclass(frozen=True)
class BayesRuleEval:
    q: float
    threshold: float
    form: Optional[str] = None

    def __post_init__(self):
        q = float(self.q)
        if not q >= 1:
            raise InvalidInputError(f"q must be >= 1, got {self.q!r}")
        expected = INDICATOR if q == 1.0 else LOGISTIC
        if self.form is None:
            object.__setattr__(self, "form", expected)
        elif self.form != expected:
            raise InvalidInputError(f"q={q} requires the {expected} form, got {self.form!r}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "threshold", float(self.threshold))


def bayes_rule(q: float, a: float, t: float, z, sigma: float = 1.0):
    """Posterior-risk minimiser evaluated at observation(s) ``z``.

    q > 1: 1 / (1 + exp(a (t - z) / ((q - 1) sigma^2))), saturated to exactly
    0 or 1 once the exponent leaves [-700, 700].
    q = 1: 1{z >= t}.
    """
    q = float(q)
    if not q >= 1:
        raise InvalidInputError(f"q must be >= 1, got {q!r}")
    a = check_scale(a)
    z = np.asarray(z, dtype=float)
    if q == 1.0:
        out = (z >= t).astype(float)
    else:
        x = a * (t - z) / ((q - 1.0) * sigma * sigma)
        out = np.where(x > _SATURATION, 0.0, np.where(x < -_SATURATION, 1.0, expit(-x)))
    return float(out) if out.ndim == 0 else out


def matched_threshold(prior: TwoPointPrior, sigma: float = 1.0) -> float:
    """a/2 + sigma^2 log((1 - rho) / rho) / a: posterior odds equal one."""
    return prior.a / 2.0 + sigma**2 * math.log((1.0 - prior.rho) / prior.rho) / prior.a


def indicator_risk(q: float, prior: TwoPointPrior, sigma: float, t: float) -> float:
    """Closed-form Bayes risk of the step rule 1{z >= t}.

    a^q [rho P(sigma eps < t - a) + (1 - rho) P(sigma eps >= t)]
    """
    a, rho = prior.a, prior.rho
    return a**q * (rho * std_upper_tail((a - t) / sigma) + (1.0 - rho) * std_upper_tail(t / sigma))


RuleLike = Union[BayesRuleEval, Callable[[float], float]]


def component_bayes_risk(
    q: float,
    prior: TwoPointPrior,
    sigma: float,
    rule: RuleLike,
    tol: float = RISK_TOL,
) -> float:
    """a^q [rho E_a |T - 1|^q + (1 - rho) E_0 |T|^q] by adaptive quadrature.

    ``rule`` is a :class:`BayesRuleEval` or any callable z -> [0, 1]. The
    absolute error target ``tol`` applies to the returned (scaled) risk.
    """
    q = float(q)
    a, rho = prior.a, prior.rho
    if not sigma > 0:
        raise InvalidInputError(f"sigma must be positive, got {sigma!r}")
    points = None
    if isinstance(rule, BayesRuleEval):
        if rule.q != q:
            raise InvalidInputError("rule and risk use different q")
        thr = rule.threshold
        points = [thr]
        T = lambda z: bayes_rule(q, a, thr, z, sigma)  # noqa: E731
    else:
        T = rule
    # split the error budget between the two integrals, undoing the a^q factor
    sub_tol = max(tol / (2.0 * max(a**q, 1.0)), 1e-14)
    on = integrate(
        lambda z: abs(T(z) - 1.0) ** q * normal_pdf(z, a, sigma),
        -math.inf, math.inf, sub_tol, points=points, center=a, scale=sigma,
    )
    off = integrate(
        lambda z: abs(T(z)) ** q * normal_pdf(z, 0.0, sigma),
        -math.inf, math.inf, sub_tol, points=points, center=0.0, scale=sigma,
    )
    return a**q * (rho * on + (1.0 - rho) * off)


def best_indicator_threshold(
    q: float, prior: TwoPointPrior, sigma: float, thresholds: Iterable[float]
) -> tuple[float, float]:
    """Grid search over step rules; returns ``(best_threshold, best_risk)``."""
    grid = np.asarray(list(thresholds), dtype=float)
    if grid.size == 0:
        raise InvalidInputError("threshold grid is empty")
    a, rho = prior.a, prior.rho
    risks = a**q * (
        rho * std_upper_tail((a - grid) / sigma) + (1.0 - rho) * std_upper_tail(grid / sigma)
    )
    k = int(np.argmin(risks))
    return float(grid[k]), float(risks[k])


@dataclass(frozen=True)
class LowerBoundCheck:
    """Outcome of comparing oracle Bayes risks with the closed-form bound.

    ``oracle_risk`` uses the threshold t(a) built from the config sparsity s;
    ``matched_oracle_risk`` uses the posterior-odds threshold of the s'/p prior
    (the exact Bayes risk). ``margin`` is ``oracle_risk - bound``.
    """

    a: float
    s_prime: float
    rule_form: str
    scaled_threshold: float
    matched_threshold: float
    oracle_risk: float
    matched_oracle_risk: float
    bound: float
    margin: float
    matched_margin: float
    ok: bool


def verify_lower_bound(cfg: ProblemConfig, a, s_prime: float) -> LowerBoundCheck:
    """Check that p times the component Bayes risk dominates the recovery bound.

    Identity design only. Raises nothing on a violated bound; inspect ``ok``.
    """
    a = check_scale(a)
    s_prime = float(s_prime)
    if not 0.0 < s_prime < cfg.s:
        raise InvalidInputError(f"s' must lie in (0, s), got {s_prime!r}")
    prior = TwoPointPrior(a, s_prime / cfg.p)
    t_scaled = threshold_t(a, cfg)
    t_match = matched_threshold(prior, cfg.sigma)
    oracle = cfg.p * component_bayes_risk(cfg.q, prior, cfg.sigma, BayesRuleEval(cfg.q, t_scaled))
    matched = cfg.p * component_bayes_risk(cfg.q, prior, cfg.sigma, BayesRuleEval(cfg.q, t_match))
    bound = lower_bound_recovery(cfg, a, s_prime)
    margin = oracle - bound
    return LowerBoundCheck(
        a=a,
        s_prime=s_prime,
        rule_form=INDICATOR if cfg.q == 1.0 else LOGISTIC,
        scaled_threshold=t_scaled,
        matched_threshold=t_match,
        oracle_risk=oracle,
        matched_oracle_risk=matched,
        bound=bound,
        margin=margin,
        matched_margin=matched - bound,
        ok=margin >= -DOMINANCE_SLACK and matched - bound >= -DOMINANCE_SLACK,
    )


def gaussian_prior_component_risk(nu: float, col_norm: float, sigma: float, q: float) -> float:
    """(nu sigma / (nu n + sigma))^q E|eps|^q, eps standard Gaussian.

    ``nu = inf`` gives the limit sigma_q^q / n^q.
    """
    nu, col_norm, sigma, q = float(nu), float(col_norm), float(sigma), float(q)
    if not (nu > 0 and col_norm > 0 and sigma > 0):
        raise InvalidInputError("nu, column norm and sigma must be positive")
    std_moment = abs_moment_q(q, 1.0)
    if math.isinf(nu):
        factor = sigma / col_norm
    else:
        factor = nu * sigma / (nu * col_norm + sigma)
    return factor**q * std_moment
