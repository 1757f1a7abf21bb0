import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distmean.errors import ConstructionError, InvalidArgumentError
from distmean.sampler import (
    CovKind,
    CovSpec,
    DistFamily,
    FamilyKind,
    MeanSpec,
    RngStream,
    build_cov,
    build_mean,
    cholesky_factor,
    derive_stream_id,
    sample_family,
    sample_mvn,
    sample_mvt,
)


class TestSpecs:
    @pytest.mark.parametrize(
        "text,kind,param",
        [("identity", CovKind.IDENTITY, 0.0), ("ar:0.5", CovKind.AR, 0.5), ("cs:0.2", CovKind.COMPOUND_SYMMETRY, 0.2)],
    )
    def test_cov_parse(self, text, kind, param):
        spec = CovSpec.parse(text)
        assert (spec.kind, spec.param) == (kind, param)
        assert CovSpec.parse(str(spec)) == spec

    def test_mean_and_family_parse(self):
        assert MeanSpec.parse("spike:20", 0.25) == MeanSpec.spike(20, 0.25)
        assert MeanSpec.parse("constant", 1.5) == MeanSpec.constant(1.5)
        assert DistFamily.parse("t:3") == DistFamily.student_t(3)
        assert DistFamily.parse("gaussian").kind is FamilyKind.GAUSSIAN

    @pytest.mark.parametrize("text", ["wishart", "ar:1.0", "ar:x"])
    def test_cov_parse_rejects(self, text):
        with pytest.raises(ValueError):
            CovSpec.parse(text)

    def test_family_rejects(self):
        with pytest.raises(ValueError):
            DistFamily.parse("cauchy")
        with pytest.raises(InvalidArgumentError):
            DistFamily.student_t(0)


class TestBuilders:
    def test_ar_entries(self):
        cov = build_cov(CovSpec.ar(0.5), 4)
        assert cov[0, 3] == pytest.approx(0.125)
        assert np.all(np.diag(cov) == 1.0)
        np.testing.assert_array_equal(cov, cov.T)

    def test_cs_entries(self):
        cov = build_cov(CovSpec.compound_symmetry(0.2), 3)
        np.testing.assert_allclose(cov, [[1, 0.2, 0.2], [0.2, 1, 0.2], [0.2, 0.2, 1]])

    def test_cs_not_positive_definite(self):
        # 1 + (p-1) * rho <= 0 makes the matrix singular or indefinite
        with pytest.raises(ConstructionError):
            build_cov(CovSpec.compound_symmetry(-0.5), 3)

    def test_spike_mean(self):
        mean = build_mean(MeanSpec.spike(2, 0.7), 5)
        np.testing.assert_array_equal(mean, [0.7, 0.7, 0, 0, 0])
        with pytest.raises(InvalidArgumentError):
            build_mean(MeanSpec.spike(6, 1.0), 5)

    def test_cholesky_rejects(self):
        with pytest.raises(ConstructionError):
            cholesky_factor(np.array([[1.0, 2.0], [0.0, 1.0]]))
        with pytest.raises(ConstructionError):
            cholesky_factor(np.ones((2, 3)))

    @settings(max_examples=50)
    @given(st.floats(min_value=-0.95, max_value=0.95), st.integers(min_value=1, max_value=40))
    def test_ar_always_spd(self, rho, p):
        cov = build_cov(CovSpec.ar(rho), p)
        factor = cholesky_factor(cov)
        np.testing.assert_allclose(factor @ factor.T, cov, atol=1e-12)


class TestStreams:
    def test_stream_reproducible(self):
        a = RngStream.derive(7, 3, 0).generator().standard_normal(5)
        b = RngStream.derive(7, 3, 0).generator().standard_normal(5)
        np.testing.assert_array_equal(a, b)

    def test_streams_differ_by_coordinate(self):
        ids = {derive_stream_id(7, i, r) for i in range(200) for r in range(3)}
        assert len(ids) == 600
        assert derive_stream_id(7, 1, 2) != derive_stream_id(8, 1, 2)

    def test_rejects_foreign_rng(self):
        with pytest.raises(InvalidArgumentError):
            sample_mvn(3, np.zeros(2), np.eye(2), rng=42)


class TestSamplers:
    def test_mvn_moments(self):
        cov = build_cov(CovSpec.ar(0.5), 3)
        mean = np.array([1.0, -2.0, 0.5])
        x = sample_mvn(200_000, mean, cov, RngStream.derive(1, 0))
        np.testing.assert_allclose(x.mean(axis=0), mean, atol=0.01)
        np.testing.assert_allclose(np.cov(x.T), cov, atol=0.015)

    @pytest.mark.parametrize("nu", [5, 100])
    def test_mvt_uses_scale_matrix(self, nu):
        scale = build_cov(CovSpec.compound_symmetry(0.2), 3)
        x = sample_mvt(400_000, np.zeros(3), scale, nu, RngStream.derive(2, nu))
        np.testing.assert_allclose(np.cov(x.T), scale * nu / (nu - 2), rtol=0.05, atol=0.02)

    def test_mvt_marginal_is_t(self):
        from scipy import stats

        x = sample_mvt(50_000, np.zeros(2), np.eye(2), 3, RngStream.derive(3, 0))
        assert stats.kstest(x[:, 0], stats.t(3).cdf).pvalue > 1e-3

    def test_family_dispatch(self):
        stream = RngStream.derive(4, 0)
        g = sample_family(DistFamily.gaussian(), 10, np.zeros(2), np.eye(2), stream)
        np.testing.assert_array_equal(g, sample_mvn(10, np.zeros(2), np.eye(2), stream))
        t = sample_family(DistFamily.student_t(4), 10, np.zeros(2), np.eye(2), stream)
        np.testing.assert_array_equal(t, sample_mvt(10, np.zeros(2), np.eye(2), 4, stream))

    def test_bad_sizes(self):
        with pytest.raises(InvalidArgumentError):
            sample_mvn(0, np.zeros(2), np.eye(2), RngStream(1))
        with pytest.raises(InvalidArgumentError):
            sample_mvn(3, np.zeros(3), np.eye(2), RngStream(1))
        with pytest.raises(InvalidArgumentError):
            sample_mvt(3, np.zeros(2), np.eye(2), 0, RngStream(1))
