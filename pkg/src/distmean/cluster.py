"""In-process simulation of a k-machine cluster.

Rows are randomly assigned to machines, each protocol computes its
machine-local summaries, and a ledger counts exactly how many scalars cross
the (simulated) wire to the hub.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import hotelling, signtest
from .decision import Method, TestDecision
from .errors import DivisibilityError, InvalidArgumentError

BYTES_PER_SCALAR = 8


class ShardPolicy(str, enum.Enum):
    REQUIRE_DIVISIBLE = "require-divisible"
    DROP_REMAINDER = "drop-remainder"


@dataclass(frozen=True)
class ShardedDataset:
    data: np.ndarray
    assignment: tuple  # k index arrays, machine order
    shard_size: int
    dropped: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    @property
    def k(self) -> int:
        return len(self.assignment)

    @property
    def p(self) -> int:
        return self.data.shape[1]

    @property
    def n_used(self) -> int:
        return self.k * self.shard_size

    def shards(self) -> list[np.ndarray]:
        return [self.data[idx] for idx in self.assignment]


@dataclass(frozen=True)
class CommLedger:
    protocol: Method
    scalars_sent: int

    @property
    def bytes_sent(self) -> int:
        return BYTES_PER_SCALAR * self.scalars_sent


def shard(data, k: int, rng, policy: ShardPolicy = ShardPolicy.REQUIRE_DIVISIBLE) -> ShardedDataset:
    """Randomly permute the rows and cut them into ``k`` consecutive equal blocks."""
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    n = data.shape[0]
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    policy = ShardPolicy(policy)
    if n % k and policy is ShardPolicy.REQUIRE_DIVISIBLE:
        raise DivisibilityError(f"n={n} rows cannot be split evenly across k={k} machines")
    size = n // k
    if size < 1:
        raise DivisibilityError(f"n={n} rows are too few for k={k} machines")
    gen = rng.generator() if hasattr(rng, "generator") else rng
    perm = gen.permutation(n)
    assignment = tuple(perm[l * size : (l + 1) * size] for l in range(k))
    return ShardedDataset(data, assignment, size, perm[k * size :])


def comm_cost(method: Method, k: int, p: int) -> CommLedger:
    """Scalars shipped to the hub: k (p x p + p) moment summaries, k sign sums of length p, or k scalars."""
    method = Method(method)
    if k < 1 or p < 1:
        raise InvalidArgumentError(f"k and p must be positive, got k={k}, p={p}")
    if method is Method.CEN_HOTELLING:
        scalars = k * (p * p + p)
    elif method is Method.CEN_SIGN:
        scalars = k * p
    else:
        scalars = k
    return CommLedger(method, scalars)


def run_protocol(sd: ShardedDataset, mu0, method: Method, alpha: float) -> tuple[TestDecision, CommLedger]:
    method = Method(method)
    mu0 = np.asarray(mu0, dtype=float)
    if mu0.size != sd.p:
        raise InvalidArgumentError(f"mu0 has length {mu0.size}, data has p={sd.p}")
    parts = sd.shards()
    n, k, p = sd.n_used, sd.k, sd.p

    if method is Method.CEN_HOTELLING:
        mean, cov = hotelling.merge_centralized([hotelling.local_moments(x) for x in parts])
        t2 = hotelling.hotelling_t2(mean, cov, n, mu0)
        decision = hotelling.centralized_decision(t2, n, p, alpha)
    elif method is Method.DIS_HOTELLING:
        shape = hotelling.HotellingShape(n, k, p)
        local = [hotelling.local_t2(x, mu0) for x in parts]
        decision = hotelling.distributed_decision(hotelling.distributed_t2(local, p), shape, alpha)
    else:
        signs = [signtest.spatial_signs(x, mu0) for x in parts]
        # the Tr(B^2) plug-in always comes from machine 1
        trace_hat = signtest.trace_b2_estimator(signs[0])
        if method is Method.CEN_SIGN:
            summaries = [signtest.local_sum(z) for z in signs]
            g = signtest.g_aggregated([b for b, _ in summaries], sum(s for _, s in summaries))
            decision = signtest.sign_decision(g, n, 1, trace_hat, alpha, method=Method.CEN_SIGN)
        else:
            g = signtest.g_distributed(signs)
            decision = signtest.sign_decision(g, n, k, trace_hat, alpha, method=Method.DIS_SIGN)
    return decision, comm_cost(method, k, p)
