import math

import numpy as np
import pytest

from sparsescale.bayes import (
    INDICATOR,
    LOGISTIC,
    BayesRuleEval,
    TwoPointPrior,
    bayes_rule,
    best_indicator_threshold,
    component_bayes_risk,
    gaussian_prior_component_risk,
    indicator_risk,
    matched_threshold,
    verify_lower_bound,
)
from sparsescale.exceptions import InvalidInputError
from sparsescale.problem import ProblemConfig


class TestRule:
    def test_midpoint(self):
        assert bayes_rule(2.0, 1.0, 0.0, 0.0) == 0.5

    def test_saturation(self):
        assert bayes_rule(2.0, 1.0, 0.0, 1e6) == 1.0
        assert bayes_rule(2.0, 1.0, 0.0, -1e6) == 0.0
        assert bayes_rule(2.0, 1e6, 1.0, 1.0 - 1e-3) == 0.0

    def test_indicator(self):
        z = np.array([0.9, 1.0, 1.1])
        assert np.array_equal(bayes_rule(1.0, 2.0, 1.0, z), [0.0, 1.0, 1.0])

    def test_monotone_in_z(self):
        z = np.linspace(-5, 5, 1001)
        vals = bayes_rule(1.5, 2.0, 0.7, z, sigma=0.8)
        assert np.all(np.diff(vals) >= 0)
        assert np.all((vals >= 0) & (vals <= 1))

    def test_sigma_enters_as_variance(self):
        # the logistic slope is a / ((q - 1) sigma^2)
        v = bayes_rule(2.0, 1.0, 0.0, 1.0, sigma=2.0)
        assert v == pytest.approx(1 / (1 + math.exp(-0.25)), rel=1e-15)

    def test_form_checked(self):
        assert BayesRuleEval(1.0, 0.0).form == INDICATOR
        assert BayesRuleEval(2.0, 0.0).form == LOGISTIC
        with pytest.raises(InvalidInputError):
            BayesRuleEval(2.0, 0.0, INDICATOR)
        with pytest.raises(InvalidInputError):
            bayes_rule(0.5, 1.0, 0.0, 0.0)


class TestMatchedThreshold:
    def test_half_prior(self):
        assert matched_threshold(TwoPointPrior(3.0, 0.5)) == 1.5

    def test_value(self):
        # 1 + log(9) / 2
        assert matched_threshold(TwoPointPrior(2.0, 0.1)) == pytest.approx(2.0986122886681098)

    def test_prior_validation(self):
        for rho in (0.0, 1.0, -0.1):
            with pytest.raises(InvalidInputError):
                TwoPointPrior(1.0, rho)
        with pytest.raises(InvalidInputError):
            TwoPointPrior(0.0, 0.5)


class TestRisk:
    @pytest.mark.parametrize("a,rho,sigma,t", [(3.0, 0.05, 1.0, 2.5), (1.0, 0.3, 0.5, 0.2), (6.0, 0.01, 2.0, 5.0)])
    def test_indicator_quadrature(self, a, rho, sigma, t):
        prior = TwoPointPrior(a, rho)
        quad = component_bayes_risk(1.0, prior, sigma, BayesRuleEval(1.0, t))
        assert quad == pytest.approx(indicator_risk(1.0, prior, sigma, t), abs=1e-9)

    def test_callable_rule(self):
        prior = TwoPointPrior(2.0, 0.2)
        quad = component_bayes_risk(1.0, prior, 1.0, lambda z: float(z >= 1.3))
        assert quad == pytest.approx(indicator_risk(1.0, prior, 1.0, 1.3), abs=1e-8)

    def test_logistic_beats_indicator_grid(self):
        q, sigma, prior = 2.0, 1.0, TwoPointPrior(3.0, 0.1)
        logistic = component_bayes_risk(q, prior, sigma, BayesRuleEval(q, matched_threshold(prior, sigma)))
        _, best = best_indicator_threshold(q, prior, sigma, np.linspace(0, 3, 3001))
        assert logistic <= best + 1e-4
        assert logistic < best

    @pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
    def test_logistic_beats_best_indicator(self, q):
        prior = TwoPointPrior(2.5, 0.05)
        logistic = component_bayes_risk(q, prior, 1.0, BayesRuleEval(q, matched_threshold(prior)))
        _, best = best_indicator_threshold(q, prior, 1.0, np.linspace(0, 2.5, 2501))
        assert logistic <= best

    def test_matched_indicator_optimal_for_q1(self):
        prior = TwoPointPrior(3.0, 0.1)
        tm = matched_threshold(prior)
        matched = indicator_risk(1.0, prior, 1.0, tm)
        grid = np.arange(0, 1001) * prior.a / 1000
        risks = [indicator_risk(1.0, prior, 1.0, t) for t in grid]
        assert min(risks) >= matched - 1e-6

    def test_mismatched_q(self):
        with pytest.raises(InvalidInputError):
            component_bayes_risk(2.0, TwoPointPrior(1.0, 0.5), 1.0, BayesRuleEval(1.5, 0.0))

    def test_empty_grid(self):
        with pytest.raises(InvalidInputError):
            best_indicator_threshold(1.0, TwoPointPrior(1.0, 0.5), 1.0, [])


class TestLowerBound:
    @pytest.mark.parametrize("q", [1.0, 2.0, 3.0])
    @pytest.mark.parametrize("a", [2.0, 4.0, 8.0])
    def test_dominates(self, q, a):
        cfg = ProblemConfig(1024, 32, 1.0, q)
        check = verify_lower_bound(cfg, a, 16)
        assert check.ok
        assert check.matched_oracle_risk <= check.oracle_risk + 1e-6
        assert check.rule_form == (INDICATOR if q == 1 else LOGISTIC)

    def test_huge_scale(self):
        check = verify_lower_bound(ProblemConfig(1024, 32), 1e3, 16)
        assert check.bound == 0.0 and check.ok

    def test_s_prime_range(self):
        for sp in (0, 32, 40):
            with pytest.raises(InvalidInputError):
                verify_lower_bound(ProblemConfig(1024, 32), 2.0, sp)


class TestGaussianPrior:
    def test_value(self):
        assert gaussian_prior_component_risk(1.0, 1.0, 1.0, 2.0) == pytest.approx(0.25)

    def test_limit(self):
        lim = gaussian_prior_component_risk(math.inf, 2.0, 1.0, 2.0)
        assert lim == pytest.approx(0.25)
        assert gaussian_prior_component_risk(1e9, 2.0, 1.0, 2.0) == pytest.approx(lim, rel=1e-8)

    def test_increasing_in_nu(self):
        vals = [gaussian_prior_component_risk(nu, 1.5, 1.0, 3.0) for nu in np.geomspace(0.01, 100, 50)]
        assert np.all(np.diff(vals) > 0)

    def test_rejects(self):
        with pytest.raises(InvalidInputError):
            gaussian_prior_component_risk(0.0, 1.0, 1.0, 2.0)
