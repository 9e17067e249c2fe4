"""Gaussian tails, absolute moments and 1-D quadrature."""

from __future__ import annotations

import math
import warnings
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy import integrate as _sp_integrate
from scipy import special

from .exceptions import InvalidInputError, NumericalFailureError

__all__ = [
    "TailBoundPair",
    "std_upper_tail",
    "tail_sandwich",
    "abs_moment_q",
    "abs_moment_root",
    "normal_pdf",
    "integrate",
    "integrate_with_error",
    "TRUNCATION_WIDTH",
]

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

#: semi-infinite integrals are cut this many scale units from the center
TRUNCATION_WIDTH = 10.0


class TailBoundPair(NamedTuple):
    lower: float
    exact: float
    upper: float


def std_upper_tail(y):
    """P(eps > y) for a standard Gaussian eps.

    Evaluated as erfc(y / sqrt(2)) / 2, which keeps full relative precision in
    the far right tail where 1 - Phi(y) cancels. Accepts scalars or arrays.
    """
    out = 0.5 * special.erfc(np.asarray(y, dtype=float) / _SQRT2)
    return float(out) if np.ndim(out) == 0 else out


def tail_sandwich(y: float) -> TailBoundPair:
    """Elementary two-sided bound on the standard Gaussian upper tail.

    lower = exp(-y^2/2) / (sqrt(2 pi) y + 4)
    upper = exp(-y^2/2) / max(sqrt(2 pi) y, 2)
    """
    y = float(y)
    if not y >= 0:
        raise InvalidInputError(f"tail sandwich is stated for y >= 0, got {y!r}")
    g = math.exp(-0.5 * y * y)
    lower = g / (_SQRT2PI * y + 4.0)
    upper = g / max(_SQRT2PI * y, 2.0)
    return TailBoundPair(lower, std_upper_tail(y), upper)


def abs_moment_q(q: float, sigma: float = 1.0) -> float:
    """E|xi|^q for xi ~ N(0, sigma^2), i.e. sigma_q ** q.

    Closed form sigma^q 2^(q/2) Gamma((q+1)/2) / sqrt(pi).
    """
    q = float(q)
    sigma = float(sigma)
    if not q >= 1:
        raise InvalidInputError(f"q must be >= 1, got {q!r}")
    if not sigma > 0:
        raise InvalidInputError(f"sigma must be positive, got {sigma!r}")
    try:
        return sigma**q * 2.0 ** (q / 2) * math.gamma((q + 1) / 2) / math.sqrt(math.pi)
    except OverflowError:
        return math.exp(
            q * math.log(sigma) + 0.5 * q * math.log(2.0)
            + math.lgamma((q + 1) / 2) - 0.5 * math.log(math.pi)
        )


def abs_moment_root(q: float, sigma: float = 1.0) -> float:
    """sigma_q = (E|xi|^q)^(1/q)."""
    return abs_moment_q(q, sigma) ** (1.0 / float(q))


def normal_pdf(x, mean: float = 0.0, sigma: float = 1.0):
    z = (np.asarray(x, dtype=float) - mean) / sigma
    out = np.exp(-0.5 * z * z) / (_SQRT2PI * sigma)
    return float(out) if np.ndim(out) == 0 else out


def integrate_with_error(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    *,
    points: Optional[Sequence[float]] = None,
    center: float = 0.0,
    scale: float = 1.0,
    limit: int = 500,
) -> tuple[float, float]:
    """Adaptive Gauss-Kronrod quadrature returning ``(value, error_bound)``.

    Infinite endpoints are replaced by ``center -/+ TRUNCATION_WIDTH * scale``.
    For integrands of the form g(x) * N(center, scale^2) density with g of
    polynomial growth, the discarded mass is about f(edge) * scale / width by
    the Mills ratio; twice that amount is added to the reported error.
    Breakpoints in ``points`` (discontinuities, kinks) are honoured.

    Raises NumericalFailureError when the error bound exceeds ``tol``.
    """
    if not tol > 0:
        raise InvalidInputError(f"tolerance must be positive, got {tol!r}")
    if not scale > 0:
        raise InvalidInputError(f"scale must be positive, got {scale!r}")
    lo, hi = float(lo), float(hi)
    if math.isnan(lo) or math.isnan(hi):
        raise InvalidInputError("integration bounds must not be NaN")
    if lo == hi:
        return 0.0, 0.0
    if lo > hi:
        value, err = integrate_with_error(
            f, hi, lo, tol, points=points, center=center, scale=scale, limit=limit
        )
        return -value, err

    truncation = 0.0
    half_width = TRUNCATION_WIDTH * scale
    if math.isinf(lo):
        lo = center - half_width
        truncation += 2.0 * abs(f(lo)) * scale / TRUNCATION_WIDTH
    if math.isinf(hi):
        hi = center + half_width
        truncation += 2.0 * abs(f(hi)) * scale / TRUNCATION_WIDTH
    if lo >= hi:
        return 0.0, truncation

    inner = None
    if points is not None:
        inner = sorted({float(x) for x in points if lo < float(x) < hi})
        inner = inner or None

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _sp_integrate.IntegrationWarning)
        value, err = _sp_integrate.quad(
            f, lo, hi, epsabs=tol, epsrel=0.0, points=inner, limit=limit
        )
    err = abs(err) + truncation
    if not math.isfinite(value) or err > tol:
        raise NumericalFailureError(
            f"quadrature on [{lo:g}, {hi:g}] stopped at error {err:.3g} > {tol:.3g}",
            best_estimate=value,
            error=err,
        )
    return value, err


def integrate(f, lo, hi, tol: float = 1e-10, **kwargs) -> float:
    """Value of :func:`integrate_with_error`; see there for the arguments."""
    return integrate_with_error(f, lo, hi, tol, **kwargs)[0]
