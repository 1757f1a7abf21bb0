"""Monte Carlo engine: replicas, experiments and power curves.

Every replica draws from streams derived from ``(master_seed, replica_index,
role)``, so each replica is reproducible on its own and the aggregated report
does not depend on how many worker threads ran it.
"""

from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .. import cluster, hotelling, signtest
from ..decision import Method
from ..errors import DistMeanError, ExperimentError
from ..sampler import RngStream, sample_family
from .scenario import ScenarioSpec

log = logging.getLogger(__name__)

THREADS_ENV = "DISTMEAN_THREADS"
MAX_FAILURE_FRACTION = 0.01

# stream roles inside a replica
ROLE_DATA = 0
ROLE_SHARD = 1
ORACLE_STREAM = (2**63 - 1, 7)


@dataclass
class ReplicaResult:
    index: int
    flags: dict = field(default_factory=dict)
    statistics: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    seconds: dict = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return bool(self.failures)


@dataclass
class ReportRow:
    scenario: str
    method: Method
    n: int
    p: int
    k: int
    c: float
    alpha: float
    replicas: int = 0
    rejections: int = 0
    mean_statistic: float = math.nan
    comm_bytes: int = 0
    analytic_power: Optional[float] = None
    wall_time: float = 0.0
    status: str = "ok"
    note: str = ""

    @property
    def reject_rate(self) -> float:
        return self.rejections / self.replicas if self.replicas else math.nan

    @property
    def mc_standard_error(self) -> float:
        r = self.reject_rate
        return math.sqrt(r * (1.0 - r) / self.replicas) if self.replicas else math.nan

    @property
    def available(self) -> bool:
        return self.status == "ok"


@dataclass
class ExperimentReport:
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def row(self, method: Method, scenario: Optional[str] = None) -> ReportRow:
        for r in self.rows:
            if r.method is Method(method) and (scenario is None or r.scenario == scenario):
                return r
        raise KeyError(f"no row for {method} / {scenario}")

    def extend(self, other: "ExperimentReport") -> "ExperimentReport":
        self.rows.extend(other.rows)
        for key, value in other.metadata.items():
            self.metadata.setdefault(key, value)
        return self


def resolve_workers(workers: Optional[int] = None) -> int:
    """Explicit count, else ``DISTMEAN_THREADS`` (0 = auto), else one per CPU."""
    if workers is None:
        raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
        try:
            workers = int(raw)
        except ValueError:
            raise DistMeanError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if workers <= 0:
        workers = os.cpu_count() or 1
    return workers


def _runnable_methods(spec: ScenarioSpec) -> list:
    return [m for m in spec.methods if spec.precondition_failure(m) is None]


def _replica(spec: ScenarioSpec, index: int, methods: Sequence[Method]) -> ReplicaResult:
    result = ReplicaResult(index)
    data_stream = RngStream.derive(spec.master_seed, index, ROLE_DATA)
    shard_stream = RngStream.derive(spec.master_seed, index, ROLE_SHARD)
    try:
        data = sample_family(spec.family, spec.n, spec.mean, spec.cov, data_stream, spec.factor)
        sd = cluster.shard(data, spec.k, shard_stream, spec.policy)
    except DistMeanError as exc:
        for m in methods:
            result.failures[m] = f"{type(exc).__name__}: {exc}"
        return result
    for m in methods:
        start = time.perf_counter()
        try:
            decision, _ = cluster.run_protocol(sd, spec.mu0_vector, m, spec.alpha)
        except (DistMeanError, ArithmeticError) as exc:
            result.failures[m] = f"{type(exc).__name__}: {exc}"
        else:
            result.flags[m] = decision.reject
            result.statistics[m] = decision.statistic
        result.seconds[m] = time.perf_counter() - start
    return result


def run_replica(spec: ScenarioSpec, replica_index: int) -> ReplicaResult:
    """One dataset, one random partition, every runnable method; deterministic in its arguments."""
    return _replica(spec, replica_index, _runnable_methods(spec))


def analytic_power(spec: ScenarioSpec, method: Method, oracle_cache: Optional[dict] = None) -> Optional[float]:
    """Asymptotic power overlay; ``None`` where no closed form applies."""
    if spec.precondition_failure(method) is not None:
        return None
    if method is Method.DIS_HOTELLING:
        shape = hotelling.HotellingShape(spec.n_used, spec.k, spec.p)
        delta = hotelling.mahalanobis_delta(spec.mean, spec.mu0_vector, spec.data_covariance())
        return hotelling.power_phi(delta, shape, spec.alpha)
    if method in (Method.CEN_SIGN, Method.DIS_SIGN):
        eta = sign_drift(spec, oracle_cache)
        if eta is None:
            return None
        k = 1 if method is Method.CEN_SIGN else spec.k
        return signtest.sign_power(eta, spec.n_used, k, spec.alpha)
    return None


def sign_drift(spec: ScenarioSpec, cache: Optional[dict] = None) -> Optional[float]:
    if not (spec.mean != spec.mu0_vector).any():
        return 0.0
    if spec.oracle_reps <= 0:
        return None
    key = (spec.family, spec.cov_spec, spec.mean_spec, spec.p, spec.mu0, spec.master_seed, spec.oracle_reps)
    if cache is not None and key in cache:
        return cache[key].eta_p
    moments = signtest.estimate_population_moments(
        spec.family,
        spec.mean,
        spec.mu0_vector,
        spec.cov,
        spec.oracle_reps,
        RngStream.derive(spec.master_seed, *ORACLE_STREAM),
    )
    if cache is not None:
        cache[key] = moments
    return moments.eta_p


def run_experiment(
    spec: ScenarioSpec,
    workers: Optional[int] = None,
    with_analytic: bool = True,
    oracle_cache: Optional[dict] = None,
) -> ExperimentReport:
    workers = resolve_workers(workers)
    runnable = _runnable_methods(spec)
    start = time.perf_counter()
    if workers == 1 or spec.replicas == 1:
        results = [_replica(spec, i, runnable) for i in range(spec.replicas)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda i: _replica(spec, i, runnable), range(spec.replicas)))
    elapsed = time.perf_counter() - start

    failed = [r for r in results if r.failed]
    if len(failed) > MAX_FAILURE_FRACTION * spec.replicas:
        first = failed[0]
        detail = "; ".join(f"{m.value}: {msg}" for m, msg in first.failures.items())
        raise ExperimentError(
            f"{len(failed)} of {spec.replicas} replicas failed in {spec.label} "
            f"(first failure at replica {first.index}: {detail})"
        )
    if failed:
        log.warning("%d replica(s) failed in %s and were excluded", len(failed), spec.label)

    report = ExperimentReport(metadata={"t_convention": "scale", "workers": workers, "seconds": elapsed})
    for m in spec.methods:
        row = ReportRow(spec.label, m, spec.n, spec.p, spec.k, spec.c, spec.alpha)
        reason = spec.precondition_failure(m)
        if reason is not None:
            row.status, row.note = "NA", reason
            report.rows.append(row)
            continue
        ok = [r for r in results if m in r.flags]
        row.replicas = len(ok)
        row.rejections = sum(1 for r in ok if r.flags[m])
        total = 0.0
        for r in ok:  # replica order keeps the float sum reproducible
            total += r.statistics[m]
        row.mean_statistic = total / len(ok) if ok else math.nan
        row.comm_bytes = cluster.comm_cost(m, spec.k, spec.p).bytes_sent
        row.wall_time = sum(r.seconds.get(m, 0.0) for r in results)
        if with_analytic:
            row.analytic_power = analytic_power(spec, m, oracle_cache)
        report.rows.append(row)
    return report


@dataclass(frozen=True)
class PowerCurvePoint:
    c: float
    k: int
    method: Method
    empirical_power: float
    analytic_power: Optional[float]
    mc_se: float


def power_curve(
    spec_template: ScenarioSpec,
    c_grid: Sequence[float],
    k_grid: Sequence[int],
    workers: Optional[int] = None,
) -> list:
    """Empirical and analytic power over a (c, k) grid, one experiment per cell."""
    if not c_grid or not k_grid:
        raise DistMeanError("power curve grids must be nonempty")
    cache: dict = {}
    points = []
    for c in c_grid:
        for k in k_grid:
            spec = spec_template.with_c(c).with_(k=int(k), name="")
            report = run_experiment(spec, workers=workers, oracle_cache=cache)
            for row in report.rows:
                points.append(
                    PowerCurvePoint(
                        c=float(c),
                        k=int(k),
                        method=row.method,
                        empirical_power=row.reject_rate if row.available else math.nan,
                        analytic_power=row.analytic_power,
                        mc_se=row.mc_standard_error if row.available else math.nan,
                    )
                )
    return points
