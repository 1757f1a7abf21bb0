import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from distmean import hotelling, signtest
from distmean.cluster import BYTES_PER_SCALAR, ShardPolicy, comm_cost, run_protocol, shard
from distmean.decision import Method
from distmean.errors import DivisibilityError, InvalidArgumentError
from distmean.sampler import RngStream


class TestShard:
    def test_partition_covers_rows(self, rng):
        sd = shard(rng.normal(size=(30, 2)), 5, RngStream(3))
        idx = np.sort(np.concatenate(sd.assignment))
        np.testing.assert_array_equal(idx, np.arange(30))
        assert sd.k == 5 and sd.shard_size == 6 and sd.n_used == 30 and sd.dropped.size == 0

    def test_same_stream_same_partition(self, rng):
        data = rng.normal(size=(20, 2))
        a = shard(data, 4, RngStream.derive(1, 0, 1))
        b = shard(data, 4, RngStream.derive(1, 0, 1))
        for x, y in zip(a.assignment, b.assignment):
            np.testing.assert_array_equal(x, y)

    def test_policies(self, rng):
        data = rng.normal(size=(23, 2))
        with pytest.raises(DivisibilityError):
            shard(data, 5, RngStream(1))
        sd = shard(data, 5, RngStream(1), ShardPolicy.DROP_REMAINDER)
        assert sd.n_used == 20 and sd.dropped.size == 3
        assert set(sd.dropped).isdisjoint(np.concatenate(sd.assignment))

    def test_too_many_machines(self, rng):
        with pytest.raises(DivisibilityError):
            shard(rng.normal(size=(3, 2)), 5, RngStream(1), ShardPolicy.DROP_REMAINDER)
        with pytest.raises(InvalidArgumentError):
            shard(rng.normal(size=(3, 2)), 0, RngStream(1))


class TestCommCost:
    @given(st.integers(min_value=1, max_value=500), st.integers(min_value=1, max_value=2000))
    def test_scalar_counts(self, k, p):
        assert comm_cost(Method.CEN_HOTELLING, k, p).scalars_sent == k * (p * p + p)
        assert comm_cost(Method.DIS_HOTELLING, k, p).scalars_sent == k
        assert comm_cost(Method.CEN_SIGN, k, p).scalars_sent == k * p
        assert comm_cost(Method.DIS_SIGN, k, p).scalars_sent == k

    def test_bytes(self):
        ledger = comm_cost(Method.CEN_SIGN, 10, 1000)
        assert ledger.bytes_sent == BYTES_PER_SCALAR * 10_000 == 80_000

    def test_rejects(self):
        with pytest.raises(InvalidArgumentError):
            comm_cost(Method.DIS_SIGN, 0, 3)


class TestRunProtocol:
    def test_centralized_hotelling_ignores_partition(self, rng):
        data = rng.normal(size=(60, 3)) + 0.2
        mu0 = np.zeros(3)
        d1, _ = run_protocol(shard(data, 1, RngStream(1)), mu0, Method.CEN_HOTELLING, 0.05)
        d6, ledger = run_protocol(shard(data, 6, RngStream(2)), mu0, Method.CEN_HOTELLING, 0.05)
        assert d6.statistic == pytest.approx(d1.statistic, rel=1e-10)
        assert d1.statistic == pytest.approx(hotelling.local_t2(data, mu0), rel=1e-10)
        assert ledger.scalars_sent == 6 * 12

    def test_distributed_hotelling_averages_local(self, rng):
        data = rng.normal(size=(60, 3))
        sd = shard(data, 3, RngStream(4))
        d, _ = run_protocol(sd, np.zeros(3), Method.DIS_HOTELLING, 0.05)
        expected = np.mean([hotelling.local_t2(x, np.zeros(3)) for x in sd.shards()]) / np.sqrt(3)
        assert d.statistic == pytest.approx(expected, rel=1e-12)

    def test_sign_methods(self, rng):
        data = rng.normal(size=(40, 5))
        sd = shard(data, 4, RngStream(5))
        cen, cl = run_protocol(sd, np.zeros(5), Method.CEN_SIGN, 0.05)
        dis, dl = run_protocol(sd, np.zeros(5), Method.DIS_SIGN, 0.05)
        z = signtest.spatial_signs(data, np.zeros(5))
        assert cen.statistic == pytest.approx(signtest.g_direct(z), abs=1e-9)
        parts = [signtest.spatial_signs(x, np.zeros(5)) for x in sd.shards()]
        assert dis.statistic == pytest.approx(signtest.g_distributed(parts), abs=1e-12)
        assert (cl.scalars_sent, dl.scalars_sent) == (20, 4)

    def test_mu0_dimension(self, rng):
        with pytest.raises(InvalidArgumentError):
            run_protocol(shard(rng.normal(size=(10, 2)), 2, RngStream(1)), np.zeros(3), Method.CEN_SIGN, 0.05)
