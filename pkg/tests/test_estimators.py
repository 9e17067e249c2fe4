import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone
from sklearn.pipeline import make_pipeline

from sparsescale import rates
from sparsescale.estimators import (
    AdaptiveHardThreshold,
    OracleSupport,
    ScaledHardThreshold,
    UniversalHardThreshold,
    bind,
    estimate,
    estimator_name,
    hard_threshold,
    make_estimator,
    support_of,
)
from sparsescale.exceptions import InvalidInputError
from sparsescale.problem import ProblemConfig, SparseSignal, sample_observation, worst_case_signal

ALL = [ScaledHardThreshold(a=5.0), AdaptiveHardThreshold(), UniversalHardThreshold()]


@pytest.mark.parametrize("spec", ALL, ids=estimator_name)
def test_zero_observation(spec, small_cfg):
    out = estimate(spec, np.zeros(small_cfg.p), small_cfg)
    assert out.l0 == 0


def test_ties_are_kept():
    assert np.array_equal(hard_threshold(np.array([1.0, -1.0, 0.5]), 1.0), [1.0, -1.0, 0.0])


def test_scaled_below_landmark_uses_t_star(desk_cfg):
    ts = rates.t_star(desk_cfg)
    for a in (0.1, 1.0, ts):
        est = bind(ScaledHardThreshold(a=a), desk_cfg).fit(np.zeros(desk_cfg.p))
        assert est.threshold_ == ts


def test_scaled_above_landmark(desk_cfg):
    est = bind(ScaledHardThreshold(a=8.0), desk_cfg).fit(np.zeros(desk_cfg.p))
    assert est.threshold_ == rates.threshold_t(8.0, desk_cfg)


def test_adaptive_matches_scaled_at_a_q1(desk_cfg):
    a1 = rates.a_eps(1.0, desk_cfg)
    y = sample_observation(worst_case_signal(desk_cfg, 4.0), desk_cfg, seed=3).y
    ad = estimate(AdaptiveHardThreshold(), y, desk_cfg)
    sc = estimate(ScaledHardThreshold(a=a1), y, desk_cfg)
    assert ad == sc


def test_universal_default(small_cfg):
    est = UniversalHardThreshold(sigma=2.0).fit(np.zeros(small_cfg.p))
    assert est.threshold_ == pytest.approx(2.0 * np.sqrt(2 * np.log(small_cfg.p)))


@pytest.mark.parametrize("spec", ALL, ids=estimator_name)
@given(seed=st.integers(0, 2**32))
@settings(max_examples=20, deadline=None)
def test_sign_equivariance(spec, seed):
    cfg = ProblemConfig(256, 8)
    y = np.random.default_rng(seed).normal(scale=3.0, size=cfg.p)
    pos = estimate(spec, y, cfg).values
    neg = estimate(spec, -y, cfg).values
    assert np.array_equal(neg, -pos)


@pytest.mark.parametrize("c", [0.25, 0.5, 2.0, 4.0])
def test_scale_equivariance(c):
    cfg = ProblemConfig(256, 8, sigma=1.0)
    y = np.random.default_rng(1).normal(scale=3.0, size=cfg.p)
    base = estimate(ScaledHardThreshold(a=5.0), y, cfg).values
    scaled = estimate(ScaledHardThreshold(a=5.0 * c), c * y, cfg.replace(sigma=c)).values
    assert np.array_equal(scaled, c * base)


def test_support_of():
    assert support_of(np.array([0.0, 5.0, 0.0, -3.0])) == frozenset({1, 3})
    assert support_of(SparseSignal(np.array([0.0, 5.0, 0.0, -3.0]))) == frozenset({1, 3})


def test_oracle_support_subset(small_cfg):
    y = np.random.default_rng(0).normal(size=small_cfg.p)
    out = estimate(OracleSupport(support=(2, 7, 9)), y, small_cfg)
    assert support_of(out) <= {2, 7, 9}
    assert np.array_equal(out.values[[2, 7, 9]], y[[2, 7, 9]])


def test_oracle_needs_support(small_cfg):
    with pytest.raises(InvalidInputError):
        OracleSupport().fit(np.zeros(small_cfg.p))
    with pytest.raises(InvalidInputError):
        OracleSupport(support=(small_cfg.p,)).fit(np.zeros(small_cfg.p))


def test_scaled_needs_a():
    with pytest.raises(InvalidInputError):
        ScaledHardThreshold().fit(np.zeros(16))


def test_sklearn_protocol():
    est = ScaledHardThreshold(a=3.0, s=2, sigma=0.5)
    assert est.get_params() == {"a": 3.0, "s": 2, "sigma": 0.5}
    twin = clone(est)
    assert twin.get_params() == est.get_params() and twin is not est
    Y = np.random.default_rng(2).normal(size=(5, 64))
    out = est.fit_transform(Y)
    assert out.shape == Y.shape
    assert np.array_equal(est.support_mask(Y), out != 0)
    pipe = make_pipeline(UniversalHardThreshold(tau=1.0), ScaledHardThreshold(a=3.0, s=2))
    assert pipe.fit_transform(Y).shape == Y.shape


def test_dimension_mismatch():
    est = UniversalHardThreshold().fit(np.zeros(10))
    with pytest.raises(InvalidInputError):
        est.transform(np.zeros(11))


def test_transform_before_fit():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        UniversalHardThreshold().transform(np.zeros(3))


def test_bind_sets_problem_params(desk_cfg):
    est = bind(AdaptiveHardThreshold(), desk_cfg.replace(sigma=2.0, q=3.0))
    assert est.get_params() == {"s": 16, "sigma": 2.0, "q": 3.0}
    assert bind(UniversalHardThreshold(tau=1.0), desk_cfg).get_params()["tau"] == 1.0


@pytest.mark.parametrize(
    "token,cls,params",
    [
        ("scaled", ScaledHardThreshold, {"a": None}),
        ("scaled:4.5", ScaledHardThreshold, {"a": 4.5}),
        ("adaptive", AdaptiveHardThreshold, {}),
        ("oracle", OracleSupport, {"support": None}),
        ("universal:2", UniversalHardThreshold, {"tau": 2.0}),
        (" Universal ", UniversalHardThreshold, {"tau": None}),
    ],
)
def test_make_estimator(token, cls, params):
    est = make_estimator(token)
    assert isinstance(est, cls)
    for k, v in params.items():
        assert est.get_params()[k] == v


@pytest.mark.parametrize("token", ["lasso", "scaled:x", "adaptive:3", ""])
def test_make_estimator_rejects(token):
    with pytest.raises(InvalidInputError):
        make_estimator(token)


def test_names_round_trip():
    for token in ("scaled", "scaled:4.5", "adaptive", "oracle", "universal", "universal:2"):
        est = make_estimator(token)
        again = make_estimator(estimator_name(est))
        assert again.get_params() == est.get_params()
