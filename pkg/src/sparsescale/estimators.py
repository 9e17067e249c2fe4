"""Coordinate-wise hard-thresholding estimators with a scikit-learn interface.

Every estimator keeps ``Y_j`` when ``|Y_j| >= threshold_`` and zeroes it
otherwise (ties are kept). ``fit`` only reads the number of coordinates p and
computes the threshold, so the usual ``fit(Y).transform(Y)`` chain and
``Pipeline``/``clone`` composition work. Inputs may be a single observation
of shape (p,) or a stack of observations of shape (n, p).
"""

from __future__ import annotations

import math
from typing import Iterable, Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin, clone
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import InvalidInputError
from .problem import NoisyObservation, ProblemConfig, SparseSignal, check_scale
from .rates import adaptive_threshold, t_star, threshold_t

__all__ = [
    "ScaledHardThreshold",
    "AdaptiveHardThreshold",
    "UniversalHardThreshold",
    "OracleSupport",
    "hard_threshold",
    "estimate",
    "support_of",
    "make_estimator",
    "estimator_name",
    "bind",
]


def hard_threshold(Y: np.ndarray, threshold: float) -> np.ndarray:
    """Keep entries with ``|Y| >= threshold``; others become +0.0."""
    return np.where(np.abs(Y) >= threshold, Y, 0.0)


def _check_observations(X, n_features: Optional[int] = None):
    X = np.asarray(X, dtype=float)
    one_d = X.ndim == 1
    X2 = check_array(X.reshape(1, -1) if one_d else X, dtype=float)
    if n_features is not None and X2.shape[1] != n_features:
        raise InvalidInputError(
            f"expected {n_features} coordinates, got {X2.shape[1]}"
        )
    return X2, one_d


def _problem(p: int, s: int, sigma: float, q: float = 2.0) -> ProblemConfig:
    if sigma == 0:
        return ProblemConfig._noiseless(p, s, q)
    return ProblemConfig(p, s, sigma, q)


class _HardThresholdBase(TransformerMixin, BaseEstimator):
    def _compute_threshold(self, n_features: int) -> float:
        raise NotImplementedError

    def fit(self, X, y=None):
        """Validate the parameters against the dimension of ``X``.

        ``y`` is ignored; it exists for pipeline compatibility.
        """
        X2, _ = _check_observations(X)
        self.n_features_in_ = X2.shape[1]
        self.threshold_ = float(self._compute_threshold(self.n_features_in_))
        return self

    def support_mask(self, X) -> np.ndarray:
        check_is_fitted(self, "threshold_")
        X2, one_d = _check_observations(X, self.n_features_in_)
        mask = np.abs(X2) >= self.threshold_
        return mask[0] if one_d else mask

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "threshold_")
        X2, one_d = _check_observations(X, self.n_features_in_)
        out = hard_threshold(X2, self.threshold_)
        return out[0] if one_d else out


class ScaledHardThreshold(_HardThresholdBase):
    """Threshold at t(max(a, t*)) with t(a) = a/2 + sigma^2 log(p/s - 1) / a.

    Parameters
    ----------
    a : float or None
        Assumed minimal magnitude of the nonzero coefficients. ``None`` leaves
        it to be filled in later (the simulation harness tunes it to the true
        scale of each probe signal).
    s : int
        Sparsity, must satisfy s < p/2.
    sigma : float
        Noise level.

    Attributes
    ----------
    threshold_ : float
        The cut-off. Equals t* exactly when a <= t*.
    n_features_in_ : int
        Dimension p seen during ``fit``.
    """

    def __init__(self, a=None, s=1, sigma=1.0):
        self.a = a
        self.s = s
        self.sigma = sigma

    def _compute_threshold(self, n_features):
        if self.a is None:
            raise InvalidInputError("ScaledHardThreshold needs a scale a before fitting")
        a = check_scale(self.a)
        cfg = _problem(n_features, self.s, self.sigma)
        landmark = t_star(cfg)
        if a <= landmark:
            return landmark
        return threshold_t(a, cfg)


class AdaptiveHardThreshold(_HardThresholdBase):
    """Scale-free rule: threshold sqrt(2 sigma^2 L + sigma^2 q log L), L = log(p/s - 1).

    Needs s <= p/4 and L > 1. The cut-off coincides with the scaled rule
    tuned at a = a_q(1).
    """

    def __init__(self, s=1, sigma=1.0, q=2.0):
        self.s = s
        self.sigma = sigma
        self.q = q

    def _compute_threshold(self, n_features):
        return adaptive_threshold(_problem(n_features, self.s, self.sigma, self.q))


class UniversalHardThreshold(_HardThresholdBase):
    """Fixed threshold ``tau``; ``tau=None`` means sigma sqrt(2 log p)."""

    def __init__(self, tau=None, sigma=1.0):
        self.tau = tau
        self.sigma = sigma

    def _compute_threshold(self, n_features):
        if self.tau is None:
            return float(self.sigma) * math.sqrt(2.0 * math.log(n_features))
        tau = float(self.tau)
        if not (math.isfinite(tau) and tau >= 0):
            raise InvalidInputError(f"tau must be a finite value >= 0, got {self.tau!r}")
        return tau


class OracleSupport(TransformerMixin, BaseEstimator):
    """Least squares on a known support: keep ``Y`` on ``support``, zero elsewhere.

    ``support=None`` is a placeholder the simulation harness replaces by the
    true support of the probe signal.
    """

    def __init__(self, support=None):
        self.support = support

    def fit(self, X, y=None):
        if self.support is None:
            raise InvalidInputError("OracleSupport needs a support before fitting")
        X2, _ = _check_observations(X)
        p = X2.shape[1]
        idx = np.asarray(sorted(set(int(i) for i in self.support)), dtype=int)
        if idx.size and (idx[0] < 0 or idx[-1] >= p):
            raise InvalidInputError(f"support indices must lie in [0, {p})")
        mask = np.zeros(p, dtype=bool)
        mask[idx] = True
        self.n_features_in_ = p
        self.mask_ = mask
        return self

    def support_mask(self, X) -> np.ndarray:
        check_is_fitted(self, "mask_")
        X2, one_d = _check_observations(X, self.n_features_in_)
        mask = np.broadcast_to(self.mask_, X2.shape) & (X2 != 0)
        return mask[0] if one_d else mask

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "mask_")
        X2, one_d = _check_observations(X, self.n_features_in_)
        out = np.where(self.mask_, X2, 0.0)
        return out[0] if one_d else out


def bind(spec, cfg: ProblemConfig):
    """Unfitted copy of ``spec`` with s, sigma, q taken from ``cfg``."""
    est = clone(spec)
    params = est.get_params(deep=False)
    update = {k: v for k, v in (("s", cfg.s), ("sigma", cfg.sigma), ("q", cfg.q)) if k in params}
    return est.set_params(**update)


def estimate(spec, y, cfg: ProblemConfig) -> SparseSignal:
    """Apply estimator ``spec`` to one observation under config ``cfg``."""
    y_arr = y.y if isinstance(y, NoisyObservation) else np.asarray(y, dtype=float)
    if y_arr.ndim != 1 or y_arr.shape[0] != cfg.p:
        raise InvalidInputError(f"observation must have shape ({cfg.p},)")
    est = bind(spec, cfg).fit(y_arr)
    return SparseSignal(est.transform(y_arr))


def support_of(beta_hat) -> frozenset:
    if isinstance(beta_hat, SparseSignal):
        return frozenset(beta_hat.support)
    return frozenset(int(i) for i in np.flatnonzero(np.asarray(beta_hat)))


def estimator_name(spec) -> str:
    if isinstance(spec, ScaledHardThreshold):
        return "scaled" if spec.a is None else f"scaled:{float(spec.a):.17g}"
    if isinstance(spec, AdaptiveHardThreshold):
        return "adaptive"
    if isinstance(spec, OracleSupport):
        return "oracle"
    if isinstance(spec, UniversalHardThreshold):
        return "universal" if spec.tau is None else f"universal:{float(spec.tau):.17g}"
    return type(spec).__name__


def make_estimator(token: str, support: Optional[Iterable[int]] = None):
    """Parse ``scaled[:a]``, ``adaptive``, ``oracle`` or ``universal[:tau]``."""
    name, _, arg = token.strip().partition(":")
    name = name.lower()
    try:
        if name == "scaled":
            return ScaledHardThreshold(a=float(arg) if arg else None)
        if name == "adaptive" and not arg:
            return AdaptiveHardThreshold()
        if name == "oracle" and not arg:
            return OracleSupport(support=None if support is None else tuple(support))
        if name == "universal":
            return UniversalHardThreshold(tau=float(arg) if arg else None)
    except ValueError as exc:
        raise InvalidInputError(f"bad estimator argument in {token!r}") from exc
    raise InvalidInputError(f"unknown estimator {token!r}")
