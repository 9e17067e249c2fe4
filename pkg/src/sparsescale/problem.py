"""Observation model Y = beta + sigma * xi and the scaled sparse signal class.

Signals in the class are s-sparse with every nonzero magnitude at least a.
Indices are zero-based throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exceptions import InvalidInputError

__all__ = [
    "ProblemConfig",
    "SparseSignal",
    "NoisyObservation",
    "DesignSpec",
    "IDENTITY",
    "check_scale",
    "check_seed",
    "noise_generator",
    "check_membership",
    "worst_case_signal",
    "sample_observation",
]

_SEED_LIMIT = 2**64


def check_scale(a) -> float:
    """Validate a signal scale and return it as a float."""
    a = float(a)
    if not math.isfinite(a) or a <= 0:
        raise InvalidInputError(f"scale a must be a positive finite real, got {a!r}")
    return a


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise InvalidInputError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed < _SEED_LIMIT:
        raise InvalidInputError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


@dataclass(frozen=True)
class ProblemConfig:
    """Dimensions and noise of one Gaussian sequence experiment.

    Parameters
    ----------
    p : int
        Ambient dimension.
    s : int
        Sparsity, ``1 <= s < p``.
    sigma : float
        Noise standard deviation, strictly positive.
    q : float
        Loss exponent of the l_q risk, ``q >= 1``.
    """

    p: int
    s: int
    sigma: float = 1.0
    q: float = 2.0

    def __post_init__(self):
        for name in ("p", "s"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise InvalidInputError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.s < 1 or self.s >= self.p:
            raise InvalidInputError(f"need 1 <= s < p, got p={self.p}, s={self.s}")
        sigma = float(self.sigma)
        q = float(self.q)
        if not math.isfinite(sigma) or sigma <= 0:
            raise InvalidInputError(f"sigma must be positive, got {self.sigma!r}")
        if not math.isfinite(q) or q < 1:
            raise InvalidInputError(f"q must be >= 1, got {self.q!r}")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "q", q)

    @classmethod
    def _noiseless(cls, p: int, s: int, q: float = 2.0) -> "ProblemConfig":
        # Test hook: sigma = 0 bypasses validation so that y == beta exactly.
        cfg = cls(p, s, 1.0, q)
        object.__setattr__(cfg, "sigma", 0.0)
        return cfg

    def log_ratio(self) -> float:
        """log(p/s - 1); requires s < p/2 so that the value is positive."""
        if not 2 * self.s < self.p:
            raise InvalidInputError(
                f"log(p/s - 1) > 0 requires s < p/2, got p={self.p}, s={self.s}"
            )
        return math.log(self.p / self.s - 1.0)

    def loglog_ratio(self) -> float:
        """log log(p/s - 1); requires s <= p/4 and log(p/s - 1) > 1."""
        if not 4 * self.s <= self.p:
            raise InvalidInputError(
                f"this rate requires s <= p/4, got p={self.p}, s={self.s}"
            )
        L = self.log_ratio()
        if L <= 1.0:
            raise InvalidInputError(
                f"log(p/s - 1) must exceed 1, got {L:.6g} (p={self.p}, s={self.s})"
            )
        return math.log(L)

    def replace(self, **changes) -> "ProblemConfig":
        fields = dict(p=self.p, s=self.s, sigma=self.sigma, q=self.q)
        fields.update(changes)
        return ProblemConfig(**fields)


@dataclass(frozen=True)
class SparseSignal:
    """A length-p vector together with its (sorted) support."""

    values: np.ndarray
    support: tuple = field(init=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1:
            raise InvalidInputError("signal values must be a 1-D vector")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("signal values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "support", tuple(int(i) for i in np.flatnonzero(values)))

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def l0(self) -> int:
        return len(self.support)

    def __eq__(self, other):
        if not isinstance(other, SparseSignal):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True)
class NoisyObservation:
    y: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        y = np.array(self.y, dtype=float)
        if y.ndim != 1:
            raise InvalidInputError("observation must be a 1-D vector")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    @property
    def p(self) -> int:
        return self.y.shape[0]


@dataclass(frozen=True)
class DesignSpec:
    """Deterministic design known only through its column norms.

    ``column_norms=None`` stands for the identity design, i.e. all norms 1.
    """

    column_norms: Optional[tuple] = None

    def __post_init__(self):
        if self.column_norms is None:
            return
        norms = tuple(float(x) for x in self.column_norms)
        if not norms:
            raise InvalidInputError("column norm list is empty")
        if not all(math.isfinite(x) and x > 0 for x in norms):
            raise InvalidInputError("column norms must be strictly positive and finite")
        object.__setattr__(self, "column_norms", norms)

    @property
    def is_identity(self) -> bool:
        return self.column_norms is None

    def norms(self, p: int) -> np.ndarray:
        if self.column_norms is None:
            return np.ones(p)
        if len(self.column_norms) != p:
            raise InvalidInputError(
                f"design has {len(self.column_norms)} columns, config has p={p}"
            )
        return np.asarray(self.column_norms)


IDENTITY = DesignSpec()


def noise_generator(seed: int, *key: int) -> np.random.Generator:
    """Counter-based Philox stream addressed by ``(seed, *key)``.

    Distinct keys give statistically independent streams, so replication r
    of an experiment draws from ``noise_generator(seed, r)`` no matter which
    worker evaluates it.
    """
    seed = check_seed(seed)
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def _check_dims(beta: SparseSignal, cfg: ProblemConfig):
    if beta.p != cfg.p:
        raise InvalidInputError(f"signal has length {beta.p}, config has p={cfg.p}")


def check_membership(beta: SparseSignal, cfg: ProblemConfig, a) -> bool:
    """True iff ``beta`` is at most s-sparse with all nonzeros of magnitude >= a."""
    _check_dims(beta, cfg)
    a = check_scale(a)
    if beta.l0 > cfg.s:
        return False
    return bool(np.all(np.abs(beta.values[list(beta.support)]) >= a))


def worst_case_signal(
    cfg: ProblemConfig,
    a,
    pattern: str = "prefix",
    seed: Optional[int] = None,
    random_signs: bool = False,
) -> SparseSignal:
    """Probe signal with exactly s entries equal to +a.

    ``pattern="prefix"`` uses indices 0..s-1; ``pattern="random"`` draws the
    support from ``seed``. ``random_signs`` flips each sign with probability
    1/2 (also from ``seed``).
    """
    a = check_scale(a)
    values = np.zeros(cfg.p)
    rng = None
    if pattern == "prefix":
        support = np.arange(cfg.s)
    elif pattern == "random":
        if seed is None:
            raise InvalidInputError("random support pattern needs a seed")
        rng = noise_generator(seed, 0xA11CE)
        support = np.sort(rng.choice(cfg.p, size=cfg.s, replace=False))
    else:
        raise InvalidInputError(f"unknown support pattern {pattern!r}")
    values[support] = a
    if random_signs:
        if rng is None:
            if seed is None:
                raise InvalidInputError("random signs need a seed")
            rng = noise_generator(seed, 0xA11CE)
        values[support] *= rng.choice([-1.0, 1.0], size=cfg.s)
    return SparseSignal(values)


def sample_observation(beta: SparseSignal, cfg: ProblemConfig, seed: int) -> NoisyObservation:
    """Draw y = beta + sigma * xi with xi generated from ``seed``."""
    _check_dims(beta, cfg)
    seed = check_seed(seed)
    xi = noise_generator(seed).standard_normal(cfg.p)
    return NoisyObservation(beta.values + cfg.sigma * xi, seed)


def as_signal(values: Sequence[float] | np.ndarray | SparseSignal) -> SparseSignal:
    if isinstance(values, SparseSignal):
        return values
    return SparseSignal(np.asarray(values, dtype=float))
