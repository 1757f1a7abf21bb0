"""Scenario construction and random data generation.

Covariances (identity, AR(1), compound symmetry), spike/constant mean vectors,
Gaussian and multivariate-t samplers, and the counter-based seeding contract:
a stream is identified by ``(master_seed, stream_id)`` and the id is a hash of
integer coordinates such as ``(replica_index, role)``, so results never depend
on execution order or worker count.
"""

from __future__ import annotations

import enum
import hashlib
import struct
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConstructionError, InvalidArgumentError

_MASK64 = (1 << 64) - 1

# above this many degrees of freedom the chi-square draw uses the gamma
# sampler instead of an explicit sum of squared normals
_CHI2_SUM_MAX_NU = 64


class CovKind(str, enum.Enum):
    IDENTITY = "identity"
    AR = "ar"
    COMPOUND_SYMMETRY = "cs"


@dataclass(frozen=True)
class CovSpec:
    """Covariance pattern; ``param`` is rho for AR and the off-diagonal value for CS."""

    kind: CovKind = CovKind.IDENTITY
    param: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", CovKind(self.kind))
        if self.kind is CovKind.AR and not -1.0 < self.param < 1.0:
            raise InvalidArgumentError(f"AR coefficient must lie in (-1, 1), got {self.param}")

    @classmethod
    def identity(cls) -> "CovSpec":
        return cls(CovKind.IDENTITY)

    @classmethod
    def ar(cls, rho: float) -> "CovSpec":
        return cls(CovKind.AR, float(rho))

    @classmethod
    def compound_symmetry(cls, offdiag: float) -> "CovSpec":
        return cls(CovKind.COMPOUND_SYMMETRY, float(offdiag))

    @classmethod
    def parse(cls, text: str) -> "CovSpec":
        """Parse ``identity``, ``ar:0.5`` or ``cs:0.2``."""
        kind, _, value = text.strip().lower().partition(":")
        if kind in ("identity", "i", "eye"):
            return cls.identity()
        if kind == "ar":
            return cls.ar(float(value))
        if kind in ("cs", "compound"):
            return cls.compound_symmetry(float(value))
        raise InvalidArgumentError(f"unknown covariance spec {text!r}")

    def __str__(self) -> str:
        if self.kind is CovKind.IDENTITY:
            return "identity"
        return f"{self.kind.value}:{self.param:g}"


class MeanKind(str, enum.Enum):
    SPIKE = "spike"
    CONSTANT = "constant"


@dataclass(frozen=True)
class MeanSpec:
    """Mean pattern: ``c`` on the first ``m`` coordinates (spike) or on all of them."""

    kind: MeanKind = MeanKind.CONSTANT
    c: float = 0.0
    m: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", MeanKind(self.kind))
        if self.kind is MeanKind.SPIKE and self.m < 0:
            raise InvalidArgumentError(f"spike count must be nonnegative, got {self.m}")

    @classmethod
    def spike(cls, m: int, c: float) -> "MeanSpec":
        return cls(MeanKind.SPIKE, float(c), int(m))

    @classmethod
    def constant(cls, c: float) -> "MeanSpec":
        return cls(MeanKind.CONSTANT, float(c))

    def with_c(self, c: float) -> "MeanSpec":
        return MeanSpec(self.kind, float(c), self.m)

    @classmethod
    def parse(cls, text: str, c: float = 0.0) -> "MeanSpec":
        """Parse ``constant`` or ``spike:20``."""
        kind, _, value = text.strip().lower().partition(":")
        if kind == "constant":
            return cls.constant(c)
        if kind == "spike":
            return cls.spike(int(value), c)
        raise InvalidArgumentError(f"unknown mean spec {text!r}")

    def __str__(self) -> str:
        return "constant" if self.kind is MeanKind.CONSTANT else f"spike:{self.m}"


class FamilyKind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    STUDENT_T = "t"


@dataclass(frozen=True)
class DistFamily:
    kind: FamilyKind = FamilyKind.GAUSSIAN
    nu: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", FamilyKind(self.kind))
        if self.kind is FamilyKind.STUDENT_T and self.nu < 1:
            raise InvalidArgumentError(f"t degrees of freedom must be >= 1, got {self.nu}")

    @classmethod
    def gaussian(cls) -> "DistFamily":
        return cls(FamilyKind.GAUSSIAN)

    @classmethod
    def student_t(cls, nu: int) -> "DistFamily":
        return cls(FamilyKind.STUDENT_T, int(nu))

    @classmethod
    def parse(cls, text: str) -> "DistFamily":
        """Parse ``gaussian`` or ``t:3``."""
        kind, _, value = text.strip().lower().partition(":")
        if kind in ("gaussian", "normal"):
            return cls.gaussian()
        if kind == "t":
            return cls.student_t(int(value))
        raise InvalidArgumentError(f"unknown distribution family {text!r}")

    def __str__(self) -> str:
        return "gaussian" if self.kind is FamilyKind.GAUSSIAN else f"t:{self.nu}"


def derive_stream_id(master_seed: int, *indices: int) -> int:
    """64-bit hash of ``(master_seed, *indices)``."""
    payload = struct.pack(f"<{len(indices) + 1}Q", *((int(v) & _MASK64) for v in (master_seed, *indices)))
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_id: int = 0

    @classmethod
    def derive(cls, master_seed: int, *indices: int) -> "RngStream":
        return cls(master_seed, derive_stream_id(master_seed, *indices))

    def generator(self) -> np.random.Generator:
        """A fresh generator; identical (master_seed, stream_id) give identical sequences."""
        seq = np.random.SeedSequence([self.master_seed & _MASK64, self.stream_id & _MASK64])
        return np.random.Generator(np.random.PCG64(seq))


def build_cov(spec: CovSpec, p: int) -> np.ndarray:
    if p < 1:
        raise InvalidArgumentError(f"dimension must be >= 1, got {p}")
    if spec.kind is CovKind.IDENTITY:
        cov = np.eye(p)
    elif spec.kind is CovKind.AR:
        lags = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
        cov = spec.param ** lags.astype(float)
    else:
        cov = np.full((p, p), spec.param)
        np.fill_diagonal(cov, 1.0)
    cholesky_factor(cov)
    return cov


def build_mean(spec: MeanSpec, p: int) -> np.ndarray:
    if spec.kind is MeanKind.CONSTANT:
        return np.full(p, spec.c)
    if spec.m > p:
        raise InvalidArgumentError(f"spike count {spec.m} exceeds dimension {p}")
    mean = np.zeros(p)
    mean[: spec.m] = spec.c
    return mean


def cholesky_factor(cov: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor; raises :class:`ConstructionError` when ``cov`` is not SPD."""
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ConstructionError(f"covariance must be square, got shape {cov.shape}")
    if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12):
        raise ConstructionError("covariance is not symmetric")
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ConstructionError("covariance is not positive definite") from exc


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise InvalidArgumentError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def _correlated_normals(gen, n, mean, cov, factor):
    mean = np.asarray(mean, dtype=float)
    if n < 1:
        raise InvalidArgumentError(f"sample size must be >= 1, got {n}")
    if factor is None:
        factor = cholesky_factor(cov)
    if factor.shape != (mean.size, mean.size):
        raise InvalidArgumentError("mean and covariance dimensions differ")
    w = gen.standard_normal((n, mean.size))
    return w @ factor.T, mean


def sample_mvn(n: int, mean, cov, rng, factor: Optional[np.ndarray] = None) -> np.ndarray:
    """Rows i.i.d. N(mean, cov). Pass ``factor`` to reuse a Cholesky factor across calls."""
    gen = _as_generator(rng)
    noise, mean = _correlated_normals(gen, n, mean, cov, factor)
    return noise + mean


def sample_chisquare(gen: np.random.Generator, nu: int, size: int) -> np.ndarray:
    if nu <= _CHI2_SUM_MAX_NU:
        return np.square(gen.standard_normal((size, nu))).sum(axis=1)
    return gen.chisquare(nu, size)


def sample_mvt(n: int, mean, scale, nu: int, rng, factor: Optional[np.ndarray] = None) -> np.ndarray:
    """Rows ``mean + L w / sqrt(g / nu)``; ``scale`` is the scale matrix, so cov = nu/(nu-2) scale."""
    if nu < 1:
        raise InvalidArgumentError(f"t degrees of freedom must be >= 1, got {nu}")
    gen = _as_generator(rng)
    noise, mean = _correlated_normals(gen, n, mean, scale, factor)
    g = sample_chisquare(gen, nu, n)
    return noise / np.sqrt(g / nu)[:, None] + mean


def sample_family(family: DistFamily, n: int, mean, cov, rng, factor: Optional[np.ndarray] = None) -> np.ndarray:
    if family.kind is FamilyKind.GAUSSIAN:
        return sample_mvn(n, mean, cov, rng, factor)
    return sample_mvt(n, mean, cov, family.nu, rng, factor)
