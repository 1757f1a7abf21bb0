"""Scalar distribution primitives: standard normal, regularized incomplete beta, central F.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from statistics import NormalDist

from .errors import InvalidArgumentError

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_STD_NORMAL = NormalDist()

_BETA_RTOL = 1e-14
_BETA_TINY = 1e-300

_QUANTILE_XTOL = 1e-12
_QUANTILE_MAXIT = 200


@dataclass(frozen=True)
class FParams:
    """Degrees of freedom of a central F distribution."""

    d1: int
    d2: int

    def __post_init__(self):
        if int(self.d1) != self.d1 or int(self.d2) != self.d2:
            raise InvalidArgumentError(f"degrees of freedom must be integers, got {self}")
        if self.d1 < 1 or self.d2 < 1:
            raise InvalidArgumentError(f"degrees of freedom must be >= 1, got {self}")


def _check_finite(x: float, name: str = "x") -> float:
    x = float(x)
    if not math.isfinite(x):
        raise InvalidArgumentError(f"{name} must be finite, got {x}")
    return x


def _check_prob(q: float) -> float:
    q = float(q)
    if not 0.0 < q < 1.0:
        raise InvalidArgumentError(f"probability must lie in (0, 1), got {q}")
    return q


def normal_pdf(x: float) -> float:
    x = _check_finite(x)
    return math.exp(-0.5 * x * x - _LOG_SQRT_2PI)


def normal_cdf(x: float) -> float:
    """Standard normal CDF, computed through ``erfc`` so both tails keep full relative precision."""
    x = _check_finite(x)
    return 0.5 * math.erfc(-x / _SQRT2)


def normal_sf(x: float) -> float:
    """Upper tail ``1 - Phi(x)`` without cancellation."""
    x = _check_finite(x)
    return 0.5 * math.erfc(x / _SQRT2)


def normal_quantile(q: float) -> float:
    """Inverse of :func:`normal_cdf`.

    Seeded with the Wichura rational approximation from the standard library,
    then polished with Newton steps against our own CDF so that the round trip
    holds to ~1e-15.
    """
    q = _check_prob(q)
    x = _STD_NORMAL.inv_cdf(q)
    for _ in range(3):
        # work in the smaller tail to avoid cancellation in the residual
        if q < 0.5:
            resid = normal_cdf(x) - q
        else:
            resid = (1.0 - q) - normal_sf(x)
        dens = normal_pdf(x)
        if dens == 0.0:
            break
        step = resid / dens
        x -= step
        if abs(step) <= 1e-16 * max(1.0, abs(x)):
            break
    return x


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Modified Lentz evaluation of the incomplete beta continued fraction."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETA_TINY:
        d = _BETA_TINY
    d = 1.0 / d
    h = d
    # iterations needed grow like sqrt(max(a, b)) near the switch point
    maxit = 200 + int(20.0 * math.sqrt(max(a, b)))
    for m in range(1, maxit + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_TINY:
            d = _BETA_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETA_TINY:
            c = _BETA_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_TINY:
            d = _BETA_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETA_TINY:
            c = _BETA_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_RTOL:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def _log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function ``I_x(a, b)``."""
    a = _check_finite(a, "a")
    b = _check_finite(b, "b")
    x = _check_finite(x, "x")
    if a <= 0.0 or b <= 0.0:
        raise InvalidArgumentError(f"shape parameters must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise InvalidArgumentError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = a * math.log(x) + b * math.log1p(-x) - _log_beta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _beta_continued_fraction(a, b, x) / a
    return 1.0 - math.exp(log_front) * _beta_continued_fraction(b, a, 1.0 - x) / b


def f_cdf(x: float, fp: FParams) -> float:
    x = _check_finite(x)
    if x < 0.0:
        raise InvalidArgumentError(f"F variates are nonnegative, got {x}")
    if x == 0.0:
        return 0.0
    d1, d2 = float(fp.d1), float(fp.d2)
    return reg_inc_beta(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2))


def f_sf(x: float, fp: FParams) -> float:
    """Upper tail ``1 - f_cdf(x)`` evaluated by reflection, accurate for tiny p-values."""
    x = _check_finite(x)
    if x < 0.0:
        raise InvalidArgumentError(f"F variates are nonnegative, got {x}")
    if x == 0.0:
        return 1.0
    d1, d2 = float(fp.d1), float(fp.d2)
    return reg_inc_beta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * x))


def f_pdf(x: float, fp: FParams) -> float:
    x = _check_finite(x)
    if x < 0.0:
        raise InvalidArgumentError(f"F variates are nonnegative, got {x}")
    d1, d2 = float(fp.d1), float(fp.d2)
    if x == 0.0:
        if fp.d1 == 1:
            return math.inf
        return 1.0 if fp.d1 == 2 else 0.0
    log_pdf = (
        0.5 * d1 * math.log(d1)
        + 0.5 * d2 * math.log(d2)
        + (0.5 * d1 - 1.0) * math.log(x)
        - 0.5 * (d1 + d2) * math.log(d1 * x + d2)
        - _log_beta(0.5 * d1, 0.5 * d2)
    )
    return math.exp(log_pdf)


@lru_cache(maxsize=4096)
def _f_quantile_cached(q: float, d1: int, d2: int) -> float:
    fp = FParams(d1, d2)
    lo, hi = 0.0, 1.0
    while f_cdf(hi, fp) < q:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise ArithmeticError(f"could not bracket F quantile q={q}, {fp}")
    # safeguarded Newton: bisect whenever the Newton step leaves the bracket
    x = 0.5 * (lo + hi)
    for _ in range(_QUANTILE_MAXIT):
        resid = f_cdf(x, fp) - q
        if resid == 0.0:
            return x
        if resid < 0.0:
            lo = x
        else:
            hi = x
        dens = f_pdf(x, fp)
        newton = x - resid / dens if dens > 0.0 and math.isfinite(dens) else math.nan
        x_new = newton if lo < newton < hi else 0.5 * (lo + hi)
        if abs(x_new - x) <= _QUANTILE_XTOL * max(1.0, abs(x)):
            return x_new
        x = x_new
    raise ArithmeticError(f"F quantile iteration did not converge (q={q}, {fp})")


def f_quantile(q: float, fp: FParams) -> float:
    """Quantile of the central F distribution (bracketed bisection with Newton refinement)."""
    q = _check_prob(q)
    return _f_quantile_cached(q, int(fp.d1), int(fp.d2))
