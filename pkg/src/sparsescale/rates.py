"""Threshold landmarks, rate functions and lower bounds in closed form.

Notation used below, for a config (p, s, sigma, q):

    L   = log(p/s - 1)
    LL  = log(L)
    t(a)    = a/2 + sigma^2 L / a          scale-aware threshold
    t*      = sigma sqrt(2 L)              minimiser of t(.)
    a_q(e)  = sqrt(2 sigma^2 L + q e sigma^2 LL) + sqrt(q e sigma^2 LL)

Gaussian tails always go through :func:`sparsescale.gaussian.std_upper_tail`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import InvalidInputError, OutOfRangeError
from .gaussian import abs_moment_q, std_upper_tail
from .problem import IDENTITY, DesignSpec, ProblemConfig, check_scale

__all__ = [
    "RegimeLabel",
    "RateReport",
    "threshold_t",
    "t_star",
    "adaptive_threshold",
    "a_eps",
    "epsilon_of_a",
    "psi",
    "psi_plus",
    "psi_general",
    "hard_recovery_rate",
    "phi",
    "phi_plus",
    "phi_o",
    "phi_ad",
    "lower_bound_known_support",
    "lower_bound_recovery",
    "regime_of",
    "rate_report",
]

HARD_RECOVERY = "HardRecovery"
TRANSITION = "Transition"
HARD_ESTIMATION = "HardEstimation"


@dataclass(frozen=True)
class RegimeLabel:
    kind: str
    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.kind not in (HARD_RECOVERY, TRANSITION, HARD_ESTIMATION):
            raise InvalidInputError(f"unknown regime {self.kind!r}")
        if self.kind == TRANSITION:
            if self.epsilon is None or not 0.0 < self.epsilon < 1.0:
                raise InvalidInputError("transition regime needs epsilon in (0, 1)")
        elif self.epsilon is not None:
            raise InvalidInputError(f"{self.kind} carries no epsilon")

    def __str__(self):
        if self.kind == TRANSITION:
            return f"{TRANSITION}({self.epsilon:.6g})"
        return self.kind


@dataclass(frozen=True)
class RateReport:
    """All rate quantities at one scale. Fields a rate cannot be evaluated on
    (because of its own sparsity precondition) are ``None``."""

    a: float
    t_of_a: float
    t_star: float
    a_q0: Optional[float]
    a_q1: Optional[float]
    psi: float
    psi_plus: float
    phi: float
    phi_plus: float
    phi_o: Optional[float]
    phi_ad: Optional[float]
    regime: Optional[RegimeLabel]


def threshold_t(a, cfg: ProblemConfig) -> float:
    """t(a) = a/2 + sigma^2 log(p/s - 1) / a; needs s < p/2."""
    a = check_scale(a)
    return a / 2.0 + cfg.sigma**2 * cfg.log_ratio() / a


def t_star(cfg: ProblemConfig) -> float:
    return cfg.sigma * math.sqrt(2.0 * cfg.log_ratio())


def _transition_scale(cfg: ProblemConfig) -> float:
    # q sigma^2 loglog(p/s - 1), the quantity under the second radical of a_q(1)
    return cfg.q * cfg.sigma**2 * cfg.loglog_ratio()


def adaptive_threshold(cfg: ProblemConfig) -> float:
    """sqrt(2 sigma^2 L + sigma^2 q LL), the fixed threshold of the adaptive rule."""
    return math.sqrt(2.0 * cfg.sigma**2 * cfg.log_ratio() + _transition_scale(cfg))


def a_eps(epsilon, cfg: ProblemConfig) -> float:
    epsilon = float(epsilon)
    if not 0.0 <= epsilon <= 1.0:
        raise InvalidInputError(f"epsilon must lie in [0, 1], got {epsilon!r}")
    B = epsilon * _transition_scale(cfg)
    return math.sqrt(2.0 * cfg.sigma**2 * cfg.log_ratio() + B) + math.sqrt(B)


def epsilon_of_a(a, cfg: ProblemConfig) -> float:
    """Inverse of :func:`a_eps` on [a_q(0), a_q(1)].

    Writing u = sqrt(epsilon) and squaring a - u sqrt(B1) = sqrt(t*^2 + u^2 B1)
    gives u = (a^2 - t*^2) / (2 a sqrt(B1)) exactly, with B1 the epsilon = 1
    value of the second radicand.
    """
    a = check_scale(a)
    lo, hi = a_eps(0.0, cfg), a_eps(1.0, cfg)
    if not lo <= a <= hi:
        raise OutOfRangeError(f"a={a!r} outside [a_q(0), a_q(1)] = [{lo!r}, {hi!r}]")
    B1 = _transition_scale(cfg)
    ts2 = 2.0 * cfg.sigma**2 * cfg.log_ratio()
    u = (a * a - ts2) / (2.0 * a * math.sqrt(B1))
    return min(1.0, max(0.0, u * u))


def _tail(x: float, sigma: float) -> float:
    # P(sigma * eps > x)
    return std_upper_tail(x / sigma)


def psi(cfg: ProblemConfig, a) -> float:
    """(p - s) P(sigma eps > t(a)) + s P(sigma eps > a - t(a))."""
    t = threshold_t(a, cfg)
    return (cfg.p - cfg.s) * _tail(t, cfg.sigma) + cfg.s * _tail(a - t, cfg.sigma)


def psi_plus(cfg: ProblemConfig, a) -> float:
    """As :func:`psi` with the second tail argument replaced by (a - t(a))_+."""
    t = threshold_t(a, cfg)
    return (cfg.p - cfg.s) * _tail(t, cfg.sigma) + cfg.s * _tail(max(a - t, 0.0), cfg.sigma)


def psi_general(
    cfg: ProblemConfig,
    a,
    design: DesignSpec = IDENTITY,
    weight_sparsity: Optional[float] = None,
) -> float:
    """Design-dependent Hamming functional.

    sum_j (w/p) P(sigma eps >= (a - t_j(a)) n_j) + (1 - w/p) P(sigma eps >= t_j(a) n_j)
    with n_j the column norms, t_j(a) = a/2 + sigma^2 log(p/s - 1) / (a n_j^2),
    and prior weight w = s unless ``weight_sparsity`` is given. The per-column
    thresholds always use the config sparsity s.

    With the identity design and w = s the sum collapses to :func:`psi`
    (p * (s/p) = s and p * (1 - s/p) = p - s).
    """
    a = check_scale(a)
    norms = design.norms(cfg.p)
    w = cfg.s if weight_sparsity is None else float(weight_sparsity)
    if not 0.0 < w < cfg.p:
        raise InvalidInputError(f"weight sparsity must lie in (0, p), got {w!r}")
    L = cfg.log_ratio()
    tj = a / 2.0 + cfg.sigma**2 * L / (a * norms**2)
    rho = w / cfg.p
    on = std_upper_tail((a - tj) * norms / cfg.sigma)
    off = std_upper_tail(tj * norms / cfg.sigma)
    terms = rho * np.atleast_1d(on) + (1.0 - rho) * np.atleast_1d(off)
    return math.fsum(terms.tolist())


def hard_recovery_rate(cfg: ProblemConfig) -> float:
    """s sigma^q (2 log(p/s - 1))^(q/2), the plateau below t*."""
    return cfg.s * cfg.sigma**cfg.q * (2.0 * cfg.log_ratio()) ** (cfg.q / 2.0)


def _oracle_rate(cfg: ProblemConfig) -> float:
    return cfg.s * abs_moment_q(cfg.q, cfg.sigma)


def phi(cfg: ProblemConfig, a) -> float:
    a = check_scale(a)
    if a >= t_star(cfg):
        return max(a**cfg.q * psi(cfg, a), _oracle_rate(cfg))
    return hard_recovery_rate(cfg)


def phi_plus(cfg: ProblemConfig, a) -> float:
    a = check_scale(a)
    if a >= t_star(cfg):
        return max(a**cfg.q * psi_plus(cfg, a), _oracle_rate(cfg))
    return hard_recovery_rate(cfg)


def phi_o(cfg: ProblemConfig, a) -> float:
    """Sharp rate: plateau up to a_q(0), transition formula, then s sigma_q^q.

    In between, a = a_q(epsilon) and the value is
    s sigma^q (2L)^(q(1-epsilon)/2) / (1 + sigma sqrt(pi/2 epsilon q LL)),
    floored at s sigma_q^q.
    """
    a = check_scale(a)
    if a <= a_eps(0.0, cfg):
        return hard_recovery_rate(cfg)
    if a >= a_eps(1.0, cfg):
        return _oracle_rate(cfg)
    eps = epsilon_of_a(a, cfg)
    L, LL = cfg.log_ratio(), cfg.loglog_ratio()
    num = cfg.s * cfg.sigma**cfg.q * (2.0 * L) ** (cfg.q * (1.0 - eps) / 2.0)
    den = 1.0 + cfg.sigma * math.sqrt(math.pi / 2.0 * eps * cfg.q * LL)
    return max(num / den, _oracle_rate(cfg))


def phi_ad(cfg: ProblemConfig, a) -> float:
    a = check_scale(a)
    if a >= a_eps(1.0, cfg):
        return _oracle_rate(cfg)
    return hard_recovery_rate(cfg)


def lower_bound_known_support(cfg: ProblemConfig, design: DesignSpec = IDENTITY) -> float:
    """sigma_q^q * max over |S| = s of sum_{i in S} ||X_i||^-q.

    The maximum is attained on the s smallest column norms.
    """
    norms = np.sort(design.norms(cfg.p))[: cfg.s]
    return abs_moment_q(cfg.q, cfg.sigma) * math.fsum((norms ** -cfg.q).tolist())


def lower_bound_recovery(
    cfg: ProblemConfig, a, s_prime: float, design: DesignSpec = IDENTITY
) -> float:
    """a^q (s'/s) (2^-q Psi(p, s, a, sigma, X) - 2 s exp(-(s - s')^2 / (2 s))), floored at 0."""
    a = check_scale(a)
    s_prime = float(s_prime)
    if not 0.0 < s_prime < cfg.s:
        raise InvalidInputError(f"s' must lie in (0, s), got {s_prime!r}")
    s = cfg.s
    inner = 2.0**-cfg.q * psi_general(cfg, a, design) - 2.0 * s * math.exp(
        -((s - s_prime) ** 2) / (2.0 * s)
    )
    return max(0.0, a**cfg.q * (s_prime / s) * inner)


def regime_of(cfg: ProblemConfig, a) -> RegimeLabel:
    a = check_scale(a)
    if a <= a_eps(0.0, cfg):
        return RegimeLabel(HARD_RECOVERY)
    if a >= a_eps(1.0, cfg):
        return RegimeLabel(HARD_ESTIMATION)
    eps = epsilon_of_a(a, cfg)
    if eps <= 0.0:
        return RegimeLabel(HARD_RECOVERY)
    if eps >= 1.0:
        return RegimeLabel(HARD_ESTIMATION)
    return RegimeLabel(TRANSITION, eps)


def _maybe(fn, *args):
    try:
        return fn(*args)
    except InvalidInputError:
        return None


def rate_report(cfg: ProblemConfig, a) -> RateReport:
    """Every landmark and rate at scale ``a``; needs s < p/2.

    Quantities that also need s <= p/4 and log(p/s - 1) > 1 are ``None`` when
    those fail.
    """
    a = check_scale(a)
    return RateReport(
        a=a,
        t_of_a=threshold_t(a, cfg),
        t_star=t_star(cfg),
        a_q0=_maybe(a_eps, 0.0, cfg),
        a_q1=_maybe(a_eps, 1.0, cfg),
        psi=psi(cfg, a),
        psi_plus=psi_plus(cfg, a),
        phi=phi(cfg, a),
        phi_plus=phi_plus(cfg, a),
        phi_o=_maybe(phi_o, cfg, a),
        phi_ad=_maybe(phi_ad, cfg, a),
        regime=_maybe(regime_of, cfg, a),
    )
