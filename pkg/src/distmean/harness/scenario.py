from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional

import numpy as np

from ..cluster import ShardPolicy
from ..decision import Method
from ..errors import DivisibilityError, InvalidArgumentError
from ..sampler import CovSpec, DistFamily, FamilyKind, MeanSpec, build_cov, build_mean, cholesky_factor

DEFAULT_REPLICAS = 500
DEFAULT_ORACLE_REPS = 100_000

METHOD_ORDER = (Method.CEN_HOTELLING, Method.DIS_HOTELLING, Method.CEN_SIGN, Method.DIS_SIGN)


def sort_methods(methods) -> tuple:
    chosen = {Method(m) for m in methods}
    return tuple(m for m in METHOD_ORDER if m in chosen)


@dataclass(frozen=True)
class ScenarioSpec:
    """Generative description of one Monte Carlo cell.

    ``mu0`` defaults to the zero vector. The t family uses ``cov_spec`` as its
    scale matrix.
    """

    family: DistFamily = field(default_factory=DistFamily.gaussian)
    mean_spec: MeanSpec = field(default_factory=lambda: MeanSpec.constant(0.0))
    cov_spec: CovSpec = field(default_factory=CovSpec.identity)
    n: int = 1000
    p: int = 10
    k: int = 10
    alpha: float = 0.05
    methods: tuple = (Method.CEN_HOTELLING, Method.DIS_HOTELLING)
    replicas: int = DEFAULT_REPLICAS
    master_seed: int = 20240101
    mu0: Optional[tuple] = None
    policy: ShardPolicy = ShardPolicy.DROP_REMAINDER
    oracle_reps: int = DEFAULT_ORACLE_REPS
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "methods", sort_methods(self.methods))
        object.__setattr__(self, "policy", ShardPolicy(self.policy))
        if self.mu0 is not None:
            object.__setattr__(self, "mu0", tuple(float(v) for v in self.mu0))
            if len(self.mu0) != self.p:
                raise InvalidArgumentError(f"mu0 has length {len(self.mu0)}, expected p={self.p}")
        if self.replicas < 1:
            raise InvalidArgumentError(f"replicas must be >= 1, got {self.replicas}")
        if self.n < 1 or self.p < 1 or self.k < 1:
            raise InvalidArgumentError(f"n, p, k must be positive (n={self.n}, p={self.p}, k={self.k})")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidArgumentError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.policy is ShardPolicy.REQUIRE_DIVISIBLE and self.n % self.k:
            raise DivisibilityError(f"n={self.n} is not divisible by k={self.k}")
        if self.n // self.k < 1:
            raise DivisibilityError(f"n={self.n} rows are too few for k={self.k} machines")

    @property
    def c(self) -> float:
        return self.mean_spec.c

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        return f"{self.family}/{self.cov_spec}/{self.mean_spec}/n{self.n}-p{self.p}-k{self.k}-c{self.c:g}"

    @property
    def shard_size(self) -> int:
        return self.n // self.k

    @property
    def n_used(self) -> int:
        return self.k * self.shard_size

    @cached_property
    def mean(self) -> np.ndarray:
        return build_mean(self.mean_spec, self.p)

    @cached_property
    def mu0_vector(self) -> np.ndarray:
        return np.zeros(self.p) if self.mu0 is None else np.asarray(self.mu0, dtype=float)

    @cached_property
    def cov(self) -> np.ndarray:
        return build_cov(self.cov_spec, self.p)

    @cached_property
    def factor(self) -> np.ndarray:
        return cholesky_factor(self.cov)

    def data_covariance(self) -> np.ndarray:
        """Covariance of one observation (the t scale matrix inflated by nu/(nu-2))."""
        if self.family.kind is FamilyKind.STUDENT_T:
            if self.family.nu <= 2:
                raise InvalidArgumentError(f"t_{self.family.nu} has no finite covariance")
            return self.cov * self.family.nu / (self.family.nu - 2)
        return self.cov

    def precondition_failure(self, method: Method) -> Optional[str]:
        """Why ``method`` cannot run on this cell, or ``None`` if it can."""
        n, k, p, n_l = self.n_used, self.k, self.p, self.shard_size
        if method is Method.CEN_HOTELLING and p >= n:
            return f"centralized Hotelling needs p < n (p={p}, n={n})"
        if method is Method.DIS_HOTELLING:
            if p * k >= n:
                return f"distributed Hotelling needs p*k < n (p*k={p * k}, n={n})"
            if n_l - p - 2 <= 0:
                return f"distributed Hotelling needs n/k > p + 2 (n/k={n_l}, p={p})"
        if method in (Method.CEN_SIGN, Method.DIS_SIGN) and n_l <= 2:
            return f"trace plug-in needs more than 2 rows on machine 1 (n/k={n_l})"
        return None

    def with_(self, **changes) -> "ScenarioSpec":
        return replace(self, **changes)

    def with_c(self, c: float) -> "ScenarioSpec":
        return replace(self, mean_spec=self.mean_spec.with_c(c))
