"""Fast internal consistency checks run by ``sparsescale selftest``."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import rates
from .bayes import BayesRuleEval, TwoPointPrior, component_bayes_risk, indicator_risk
from .estimators import OracleSupport
from .gaussian import abs_moment_q, integrate, normal_pdf, std_upper_tail, tail_sandwich
from .montecarlo import empirical_risk
from .problem import ProblemConfig, worst_case_signal


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _tail_sandwich_grid():
    worst = 0
    for k in range(101):
        lo, exact, hi = tail_sandwich(k / 10)
        if not lo <= exact <= hi:
            worst += 1
    return worst == 0, f"{101 - worst}/101 grid points sandwiched"


def _moments(moment):
    errs = []
    for q in (1.0, 1.5, 2.0, 3.0, 4.0):
        quad = integrate(lambda x: abs(x) ** q * normal_pdf(x), -math.inf, math.inf, 1e-12)
        errs.append(abs(moment(q, 1.0) - quad) / quad)
    worst = max(errs)
    return worst <= 1e-8, f"max relative error vs quadrature {worst:.2e}"


def _fixed_point():
    worst = 0.0
    for p, s, sigma in [(100, 1, 1.0), (1000, 10, 0.5), (2**14, 16, 2.0), (50, 20, 1.0)]:
        cfg = ProblemConfig(p, s, sigma)
        ts = rates.t_star(cfg)
        worst = max(worst, abs(rates.threshold_t(ts, cfg) - ts))
    return worst < 1e-12, f"max |t(t*) - t*| = {worst:.2e}"


def _a_q_identities():
    cfg = ProblemConfig(2**14, 16, 1.0, 2.0)
    B = cfg.q * cfg.sigma**2 * cfg.loglog_ratio()
    worst = 0.0
    for eps in (0.0, 0.25, 0.5, 0.75, 1.0):
        a = rates.a_eps(eps, cfg)
        t = rates.threshold_t(a, cfg)
        worst = max(
            worst,
            abs(t - math.sqrt(2 * cfg.sigma**2 * cfg.log_ratio() + eps * B)),
            abs(a - t - math.sqrt(eps * B)),
        )
    return worst < 1e-10, f"max identity residual {worst:.2e}"


def _tail_symmetry():
    ys = np.linspace(-8, 8, 161)
    worst = float(np.max(np.abs(std_upper_tail(ys) + std_upper_tail(-ys) - 1.0)))
    return worst < 1e-12, f"max |Q(y) + Q(-y) - 1| = {worst:.2e}"


def _quadrature_closed_form():
    prior = TwoPointPrior(3.0, 0.05)
    quad = component_bayes_risk(1.0, prior, 1.0, BayesRuleEval(1.0, 2.5))
    closed = indicator_risk(1.0, prior, 1.0, 2.5)
    return abs(quad - closed) < 1e-9, f"|quadrature - closed form| = {abs(quad - closed):.2e}"


def _oracle_calibration(moment):
    cfg = ProblemConfig(256, 8, 1.0, 2.0)
    beta = worst_case_signal(cfg, 5.0)
    est = empirical_risk(OracleSupport(), beta, cfg, reps=4000, seed=7)
    target = cfg.s * moment(cfg.q, cfg.sigma)
    z = abs(est.mean - target) / est.std_err
    return z <= 4.0, f"mean {est.mean:.4f} vs s*sigma_q^q {target:.4f} ({z:.2f} std err)"


def run_selftest(moment: Callable[[float, float], float] = abs_moment_q) -> list[CheckResult]:
    """Run every check; ``moment`` can be swapped to exercise failure paths."""
    checks = [
        ("tail-sandwich", _tail_sandwich_grid),
        ("tail-symmetry", _tail_symmetry),
        ("abs-moments", lambda: _moments(moment)),
        ("threshold-fixed-point", _fixed_point),
        ("a_q-identities", _a_q_identities),
        ("bayes-quadrature", _quadrature_closed_form),
        ("oracle-calibration", lambda: _oracle_calibration(moment)),
    ]
    results = []
    for name, fn in checks:
        start = time.perf_counter()
        try:
            passed, detail = fn()
        except Exception as exc:  # a crash is a failed check, not an aborted run
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(
            CheckResult(name, bool(passed), f"{detail} [{time.perf_counter() - start:.2f}s]")
        )
    return results
