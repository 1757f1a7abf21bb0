"""Centralized and distributed Hotelling T^2 tests for a one-sample mean vector.

The centralized statistic is assembled at a hub from per-machine first and
second moments; the distributed statistic averages per-machine T^2 values and
is calibrated by a normal approximation whose centre and spread follow from
the moments of a central F variate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .decision import Method, TestDecision
from .errors import (
    ConditionViolationError,
    InvalidArgumentError,
    MomentUndefinedError,
    RankDeficiencyError,
)
from .statdist import FParams, f_quantile, f_sf, normal_cdf, normal_quantile, normal_sf


@dataclass(frozen=True)
class LocalMoments:
    mean: np.ndarray
    second_moment: np.ndarray
    count: int

    @property
    def covariance(self) -> np.ndarray:
        """Biased (divide-by-count) local covariance."""
        return self.second_moment - np.outer(self.mean, self.mean)


@dataclass(frozen=True)
class HotellingShape:
    n: int
    k: int
    p: int

    def __post_init__(self):
        if self.n < 1 or self.k < 1 or self.p < 1:
            raise InvalidArgumentError(f"n, k, p must be positive, got {self}")
        if self.n % self.k:
            raise InvalidArgumentError(f"n={self.n} is not a multiple of k={self.k}")

    @property
    def shard_size(self) -> int:
        return self.n // self.k

    @property
    def gamma_n(self) -> float:
        return self.p * self.k / self.n


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def _spd_factor(cov: np.ndarray) -> np.ndarray:
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise RankDeficiencyError(
            f"covariance estimate of dimension {cov.shape[0]} is not positive definite "
            "(p >= n or degenerate data)"
        ) from exc


def _mahalanobis(diff: np.ndarray, cov: np.ndarray) -> float:
    factor = _spd_factor(cov)
    y = solve_triangular(factor, np.atleast_1d(diff), lower=True, check_finite=False)
    return float(y @ y)


def local_moments(shard) -> LocalMoments:
    """Per-machine sample mean and uncentred second moment."""
    x = np.asarray(shard, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] == 0:
        raise InvalidArgumentError("cannot summarize an empty shard")
    n_l = x.shape[0]
    return LocalMoments(x.sum(axis=0) / n_l, (x.T @ x) / n_l, n_l)


def merge_centralized(parts: Sequence[LocalMoments]) -> tuple[np.ndarray, np.ndarray]:
    """Pool per-machine moments into the global mean and biased covariance.

    Parts are accumulated in the order given (machine index ascending).
    """
    if not parts:
        raise InvalidArgumentError("need at least one machine summary")
    p = parts[0].mean.size
    total = 0
    mean_acc = np.zeros(p)
    second_acc = np.zeros((p, p))
    for part in parts:
        if part.mean.size != p or part.second_moment.shape != (p, p):
            raise InvalidArgumentError("machine summaries have mismatched dimensions")
        total += part.count
        mean_acc += part.count * part.mean
        second_acc += part.count * part.second_moment
    mean = mean_acc / total
    cov = second_acc / total - np.outer(mean, mean)
    return mean, cov


def hotelling_t2(mean, cov, n: int, mu0) -> float:
    """``(n - 1) (mean - mu0)' cov^{-1} (mean - mu0)`` via a Cholesky solve."""
    diff = np.atleast_1d(np.asarray(mean, dtype=float) - np.asarray(mu0, dtype=float))
    return (n - 1) * _mahalanobis(diff, cov)


def local_t2(shard, mu0) -> float:
    """Hotelling T^2 computed on a single machine's data."""
    x = np.asarray(shard, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] == 0:
        raise InvalidArgumentError("cannot summarize an empty shard")
    n_l = x.shape[0]
    mean = x.mean(axis=0)
    centred = x - mean
    cov = centred.T @ centred / n_l
    return hotelling_t2(mean, cov, n_l, mu0)


def centralized_decision(t2: float, n: int, p: int, alpha: float) -> TestDecision:
    """Exact F calibration: reject when ``(n-p)/((n-1)p) T^2`` exceeds the F(p, n-p) quantile."""
    alpha = _check_alpha(alpha)
    if p >= n:
        raise InvalidArgumentError(f"centralized Hotelling test needs p < n, got p={p}, n={n}")
    fp = FParams(p, n - p)
    normalized = (n - p) / ((n - 1) * p) * float(t2)
    threshold = f_quantile(1.0 - alpha, fp)
    return TestDecision(
        statistic=float(t2),
        normalized=normalized,
        threshold=threshold,
        p_value=f_sf(normalized, fp),
        reject=normalized > threshold,
        method=Method.CEN_HOTELLING,
        alpha=alpha,
    )


def distributed_t2(local_t2s: Sequence[float], p: int) -> float:
    if len(local_t2s) == 0:
        raise InvalidArgumentError("need at least one local statistic")
    values = np.asarray(local_t2s, dtype=float)
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise InvalidArgumentError("local statistics must be finite and nonnegative")
    return float(values.sum() / (values.size * math.sqrt(p)))


def null_center(shape: HotellingShape) -> float:
    """Null mean of the averaged statistic, ``(n_l - 1) sqrt(p) / (n_l - p - 2)``."""
    n_l, p = shape.shard_size, shape.p
    return (n_l - 1) * math.sqrt(p) / (n_l - p - 2)


def _check_regime(shape: HotellingShape) -> None:
    if shape.gamma_n >= 1.0:
        raise ConditionViolationError(f"need p*k/n < 1, got {shape.gamma_n:g} for {shape}")
    if shape.shard_size - shape.p - 2 <= 0:
        raise ConditionViolationError(f"need n/k > p + 2, got n/k={shape.shard_size}, p={shape.p}")


def distributed_decision(t2_dis: float, shape: HotellingShape, alpha: float) -> TestDecision:
    """Two-sided normal calibration of the averaged statistic.

    The limiting ratio p*k/n is replaced by its finite-sample value ``gamma_n``.
    """
    alpha = _check_alpha(alpha)
    _check_regime(shape)
    gamma = shape.gamma_n
    scale = math.sqrt((1.0 - gamma) ** 3 * shape.k / 2.0)
    normalized = scale * abs(float(t2_dis) - null_center(shape))
    threshold = normal_quantile(1.0 - alpha / 2.0)
    return TestDecision(
        statistic=float(t2_dis),
        normalized=normalized,
        threshold=threshold,
        p_value=min(1.0, 2.0 * normal_sf(normalized)),
        reject=normalized > threshold,
        method=Method.DIS_HOTELLING,
        alpha=alpha,
    )


def _check_moment_regime(n_l: int, p: int) -> None:
    if n_l - p - 4 <= 0:
        raise MomentUndefinedError(f"moments need n_l - p - 4 > 0, got n_l={n_l}, p={p}")


def t2_moments_h0(n_l: int, p: int) -> tuple[float, float]:
    """Null mean and variance of ``T_l^2 / sqrt(p)``."""
    _check_moment_regime(n_l, p)
    mean = (n_l - 1) * math.sqrt(p) / (n_l - p - 2)
    var = 2.0 * (n_l - 1) ** 2 * (n_l - 2) / ((n_l - p - 2) ** 2 * (n_l - p - 4))
    return mean, var


def t2_moments_h1(n_l: int, p: int, delta: float) -> tuple[float, float]:
    """Mean and variance of ``T_l^2`` when the Mahalanobis signal is ``delta``.

    Follows from the noncentral F(p, n_l - p, n_l * delta) law of the rescaled statistic.
    """
    _check_moment_regime(n_l, p)
    if delta < 0:
        raise InvalidArgumentError(f"delta must be nonnegative, got {delta}")
    lam = n_l * delta
    mean = (n_l - 1) * (p + lam) / (n_l - p - 2)
    var = (
        2.0
        * (n_l - 1) ** 2
        * ((p + lam) ** 2 + (p + 2.0 * lam) * (n_l - p - 2))
        / ((n_l - p - 2) ** 2 * (n_l - p - 4))
    )
    return mean, var


def mahalanobis_delta(mu, mu0, cov) -> float:
    diff = np.atleast_1d(np.asarray(mu, dtype=float) - np.asarray(mu0, dtype=float))
    return _mahalanobis(diff, cov)


def power_phi(delta: float, shape: HotellingShape, alpha: float) -> float:
    """Asymptotic power of the distributed Hotelling test at signal ``delta``."""
    alpha = _check_alpha(alpha)
    gamma = shape.gamma_n
    if not 0.0 < gamma < 1.0:
        raise ConditionViolationError(f"power formula needs 0 < p*k/n < 1, got {gamma:g}")
    if delta < 0:
        raise InvalidArgumentError(f"delta must be nonnegative, got {delta}")
    denom = gamma + 2.0 * delta + delta * delta
    a1 = math.sqrt(gamma / denom)
    a2 = math.sqrt(shape.n * delta * delta / denom)
    z = normal_quantile(1.0 - alpha / 2.0)
    drift = a2 * math.sqrt((1.0 - gamma) / 2.0)
    return normal_sf(a1 * z - drift) + normal_cdf(-a1 * z - drift)


def relative_efficiency_hotelling(k: int) -> float:
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    return 1.0 / math.sqrt(k)
