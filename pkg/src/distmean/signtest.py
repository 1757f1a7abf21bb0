"""High-dimensional spatial-sign tests.

Observations are replaced by their spatial signs ``(x - mu0) / ||x - mu0||``.
The centralized statistic sums inner products over all pairs; the distributed
one keeps only pairs stored on the same machine, so each machine ships a
single scalar. The null variance needs ``Tr(B^2)``, estimated from the first
machine alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .decision import Method, TestDecision
from .errors import EstimatorError, InvalidArgumentError
from .sampler import DistFamily, cholesky_factor, sample_family
from .statdist import normal_cdf, normal_quantile, normal_sf


@dataclass(frozen=True)
class SignPopulationMoments:
    trace_b2: float
    eta_p: float
    mc_reps: int
    mc_se: float
    eta_se: float = 0.0


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def spatial_signs(x, mu0) -> np.ndarray:
    """Row-wise spatial signs of ``x`` about ``mu0``; a row equal to ``mu0`` maps to zero."""
    x = np.asarray(x, dtype=float)
    mu0 = np.asarray(mu0, dtype=float)
    squeeze = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != mu0.size:
        raise InvalidArgumentError(f"observation dimension {x.shape[1]} != mu0 dimension {mu0.size}")
    diff = x - mu0
    # rescale by the largest entry first so tiny differences do not underflow to a zero norm
    scale = np.max(np.abs(diff), axis=1)
    nonzero = scale > 0.0
    out = np.zeros_like(diff)
    scaled = diff[nonzero] / scale[nonzero, None]
    out[nonzero] = scaled / np.linalg.norm(scaled, axis=1)[:, None]
    return out[0] if squeeze else out


def spatial_sign(x, mu0) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InvalidArgumentError("spatial_sign takes a single observation; use spatial_signs")
    return spatial_signs(x, mu0)


def _as_sign_matrix(signs) -> np.ndarray:
    z = np.asarray(signs, dtype=float)
    if z.ndim == 1:
        z = z[None, :] if z.size else z.reshape(0, 0)
    if z.ndim != 2:
        raise InvalidArgumentError("signs must form an n x p array")
    return z


def g_direct(signs) -> float:
    """``sum_{j < i} Z_i' Z_j`` from the strictly lower triangle of the Gram matrix."""
    z = _as_sign_matrix(signs)
    if z.shape[0] < 2:
        return 0.0
    gram = z @ z.T
    return float(np.tril(gram, k=-1).sum())


def local_sum(signs) -> tuple[np.ndarray, float]:
    """Per-machine summary for the centralized statistic: ``(sum Z_i, sum ||Z_i||^2)``."""
    z = _as_sign_matrix(signs)
    return z.sum(axis=0), float(np.einsum("ij,ij->", z, z))


def g_aggregated(local_sums: Sequence, sum_sq_norms: float) -> float:
    """Centralized statistic from machine sums: ``(||sum_l B_l||^2 - sum ||Z_i||^2) / 2``.

    Subtracting the squared norms instead of ``n`` keeps the identity exact when
    some observation coincides with ``mu0``.
    """
    if len(local_sums) == 0:
        raise InvalidArgumentError("need at least one machine sum")
    p = np.asarray(local_sums[0]).size
    total = np.zeros(p)
    for b in local_sums:
        b = np.asarray(b, dtype=float)
        if b.size != p:
            raise InvalidArgumentError("machine sums have mismatched dimensions")
        total += b
    return float((total @ total - sum_sq_norms) / 2.0)


def g_distributed(shard_signs: Sequence) -> float:
    """Sum of within-machine pair statistics, combined in machine order."""
    if len(shard_signs) == 0:
        raise InvalidArgumentError("need at least one shard")
    dims = {_as_sign_matrix(s).shape[1] for s in shard_signs if len(s)}
    if len(dims) > 1:
        raise InvalidArgumentError("shards have mismatched dimensions")
    total = 0.0
    for s in shard_signs:
        total += g_direct(s)
    return total


def trace_b2_estimator(signs_shard1) -> float:
    """Plug-in estimate of ``Tr(B^2)`` from the signs held by one machine."""
    z = _as_sign_matrix(signs_shard1)
    n1, p = z.shape
    if n1 <= 2:
        raise InvalidArgumentError(f"trace estimator needs more than 2 observations, got {n1}")
    zbar = z.sum(axis=0) / (n1 - 2)
    if p <= n1:
        s = z.T @ z
        tr_s2 = float(np.einsum("ij,ij->", s, s))
        quad = float(zbar @ s @ zbar)
    else:
        gram = z @ z.T
        tr_s2 = float(np.einsum("ij,ij->", gram, gram))
        proj = z @ zbar
        quad = float(proj @ proj)
    zbar_sq = float(zbar @ zbar)
    return (
        -n1 / (n1 - 2) ** 2
        + (n1 - 1) / (n1 * (n1 - 2) ** 2) * tr_s2
        + (1 - 2 * n1) / (n1 * (n1 - 1)) * quad
        + 2.0 / n1 * zbar_sq
        + (n1 - 2) ** 2 / (n1 * (n1 - 1)) * zbar_sq**2
    )


def sign_decision(
    g: float,
    n: int,
    k: int,
    trace_b2_hat: float,
    alpha: float,
    method: Optional[Method] = None,
) -> TestDecision:
    """Two-sided normal calibration; ``k = 1`` gives the centralized ``n(n-1)`` scaling."""
    alpha = _check_alpha(alpha)
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    shard = n / k
    if shard <= 1:
        raise InvalidArgumentError(f"need n/k > 1, got n={n}, k={k}")
    if not trace_b2_hat > 0.0:
        raise EstimatorError(f"trace estimate must be positive, got {trace_b2_hat}")
    normalized = float(g) / math.sqrt(n * (shard - 1.0) * trace_b2_hat / 2.0)
    threshold = normal_quantile(1.0 - alpha / 2.0)
    if method is None:
        method = Method.CEN_SIGN if k == 1 else Method.DIS_SIGN
    return TestDecision(
        statistic=float(g),
        normalized=normalized,
        threshold=threshold,
        p_value=min(1.0, 2.0 * normal_sf(abs(normalized))),
        reject=abs(normalized) > threshold,
        method=method,
        alpha=alpha,
    )


def estimate_population_moments(
    dist: DistFamily,
    mean,
    mu0,
    cov,
    mc_reps: int,
    rng,
    batches: int = 10,
    chunk: int = 2000,
) -> SignPopulationMoments:
    """Monte Carlo estimates of ``Tr(B^2)`` and the drift ``eta_p``.

    ``B`` is the mean of ``e e' / ||e||^2`` and ``A delta`` the mean of
    ``(delta - u u'delta) / ||e||`` over simulated errors ``e``. Standard errors
    come from batch means.
    """
    if mc_reps < 1000:
        raise InvalidArgumentError(f"need at least 1000 oracle replicas, got {mc_reps}")
    mean = np.asarray(mean, dtype=float)
    delta = mean - np.asarray(mu0, dtype=float)
    p = mean.size
    factor = cholesky_factor(cov)
    gen = rng.generator() if hasattr(rng, "generator") else rng
    zero = np.zeros(p)

    sizes = [mc_reps // batches + (1 if i < mc_reps % batches else 0) for i in range(batches)]
    b_total = np.zeros((p, p))
    a_total = np.zeros(p)
    batch_traces, batch_etas = [], []
    for size in sizes:
        b_batch = np.zeros((p, p))
        a_batch = np.zeros(p)
        done = 0
        while done < size:
            m = min(chunk, size - done)
            eps = sample_family(dist, m, zero, cov, gen, factor)
            norms = np.linalg.norm(eps, axis=1)
            u = eps / norms[:, None]
            b_batch += u.T @ u
            a_batch += (delta[None, :] - u * (u @ delta)[:, None]).T @ (1.0 / norms)
            done += m
        b_total += b_batch
        a_total += a_batch
        b_mean = b_batch / size
        a_mean = a_batch / size
        tr = float(np.einsum("ij,ij->", b_mean, b_mean))
        batch_traces.append(tr)
        batch_etas.append(float(a_mean @ a_mean) / math.sqrt(2.0 * tr))

    b_hat = b_total / mc_reps
    a_delta = a_total / mc_reps
    trace_b2 = float(np.einsum("ij,ij->", b_hat, b_hat))
    eta = float(a_delta @ a_delta) / math.sqrt(2.0 * trace_b2)
    se = float(np.std(batch_traces, ddof=1) / math.sqrt(batches)) if batches > 1 else math.nan
    eta_se = float(np.std(batch_etas, ddof=1) / math.sqrt(batches)) if batches > 1 else math.nan
    return SignPopulationMoments(trace_b2=trace_b2, eta_p=eta, mc_reps=mc_reps, mc_se=se, eta_se=eta_se)


def sign_power(eta_p: float, n: float, k: int, alpha: float) -> float:
    """Asymptotic power with drift ``sqrt(n (n/k - 1)) * eta_p``; ``n`` may be fractional."""
    alpha = _check_alpha(alpha)
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    if n / k <= 1:
        raise InvalidArgumentError(f"need n/k > 1, got n={n}, k={k}")
    z = normal_quantile(1.0 - alpha / 2.0)
    drift = math.sqrt(n * (n / k - 1.0)) * eta_p
    return normal_sf(z - drift) + normal_cdf(-z - drift)


def equivalent_centralized_size(n: int, k: int, eta_p: float, alpha: float, tol: float = 1e-9) -> float:
    """Sample size ``N`` at which the centralized test matches the distributed power at ``n``.

    Bisection on ``sign_power(eta_p, N, 1, alpha)``; power is increasing in ``N``.
    """
    if eta_p <= 0:
        raise InvalidArgumentError("eta_p must be positive for the power curves to separate")
    target = sign_power(eta_p, n, k, alpha)
    lo, hi = 1.0 + 1e-12, float(n)
    if sign_power(eta_p, hi, 1, alpha) < target:
        raise ArithmeticError("centralized power at n is below the distributed power")
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if sign_power(eta_p, mid, 1, alpha) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
