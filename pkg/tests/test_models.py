import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from equivcov.errors import ConfigurationError, DomainError
from equivcov.models import (
    SeedSpec,
    SpectrumSpec,
    generator,
    population_covariance,
    random_orthogonal,
    realize_spectrum,
    sample_gaussian,
)


class TestSpectrum:
    def test_identity(self):
        np.testing.assert_array_equal(realize_spectrum(SpectrumSpec.identity(3)), [1, 1, 1])

    def test_geometric(self):
        np.testing.assert_array_equal(realize_spectrum(SpectrumSpec.geometric(3, 100)), [1e4, 100, 1])

    def test_explicit_sorted_descending(self):
        np.testing.assert_array_equal(realize_spectrum(SpectrumSpec.explicit([1, 5, 2])), [5, 2, 1])

    def test_scale(self):
        np.testing.assert_array_equal(realize_spectrum(SpectrumSpec.geometric(2, 10, scale=3)), [30, 3])

    def test_atoms_largest_remainder(self):
        g = realize_spectrum(SpectrumSpec.atoms([1.0, 5.0], [0.5, 0.5], 5))
        assert g.size == 5
        assert set(np.unique(g)) == {1.0, 5.0}
        assert np.all(np.diff(g) <= 0)
        g = realize_spectrum(SpectrumSpec.atoms([1.0, 2.0, 3.0], [1 / 3, 1 / 3, 1 / 3], 7))
        assert sorted(np.unique(g, return_counts=True)[1].tolist()) == [2, 2, 3]

    @pytest.mark.parametrize("scale", [0.0, -1.0])
    def test_nonpositive_scale(self, scale):
        with pytest.raises(DomainError):
            realize_spectrum(SpectrumSpec.identity(2, scale=scale))

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(kind="bogus", p=2),
            dict(kind="geometric", p=2, ratio=1.0),
            dict(kind="explicit", p=3, values=(1.0, 2.0)),
            dict(kind="atoms", p=3, values=(1.0,), weights=(0.5,)),
            dict(kind="identity", p=0),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigurationError):
            SpectrumSpec(**kwargs)

    def test_dict_round_trip(self):
        for spec in (
            SpectrumSpec.geometric(4, 10.0, scale=2.0),
            SpectrumSpec.atoms([1.0, 5.0], [0.25, 0.75], 8),
            SpectrumSpec.explicit([3.0, 2.0, 1.0]),
        ):
            assert SpectrumSpec.from_dict(spec.to_dict()) == spec

    def test_min_adjacent_ratio(self):
        assert SpectrumSpec.geometric(5, 100).min_adjacent_ratio == pytest.approx(100)
        assert SpectrumSpec.identity(1).min_adjacent_ratio == float("inf")


class TestSeeds:
    def test_reproducible(self):
        a = sample_gaussian(np.ones(3), 4, SeedSpec(42, 7))
        b = sample_gaussian(np.ones(3), 4, SeedSpec(42, 7))
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        base = generator(SeedSpec(42, 0)).standard_normal(8)
        for other in (SeedSpec(42, 1), SeedSpec(43, 0), SeedSpec(42, 0, domain=1)):
            assert not np.array_equal(base, generator(other).standard_normal(8))

    def test_invalid_seed(self):
        with pytest.raises(ConfigurationError):
            SeedSpec(-1)
        with pytest.raises(ConfigurationError):
            SeedSpec(0, stream_id=-1)


class TestSampling:
    def test_coordinate_variance(self):
        x = sample_gaussian(np.array([4.0, 1.0]), 100_000, SeedSpec(0))
        assert abs(x[:, 0].var() - 4.0) < 0.1
        assert abs(x[:, 1].var() - 1.0) < 0.03

    def test_rotated_population_second_moment(self):
        gamma = np.array([5.0, 2.0, 0.5])
        v = random_orthogonal(3, SeedSpec(1, 0, domain=1))
        x = sample_gaussian(gamma, 200_000, SeedSpec(1), rotation=v)
        sigma = population_covariance(gamma, v)
        emp = x.T @ x / x.shape[0]
        assert np.max(np.abs(emp - sigma)) < 0.05 * gamma.max()

    def test_trace_expectation(self):
        # E tr(S) = tr(Sigma) for the uncentred covariance
        gamma = np.array([3.0, 2.0, 1.0])
        traces = [np.sum(sample_gaussian(gamma, 20, SeedSpec(5, t)) ** 2) / 20 for t in range(2000)]
        se = np.std(traces, ddof=1) / np.sqrt(len(traces))
        assert abs(np.mean(traces) - gamma.sum()) < 4 * se

    def test_rejects_bad_gamma(self):
        with pytest.raises(DomainError):
            sample_gaussian(np.array([1.0, 0.0]), 3, SeedSpec(0))
        with pytest.raises(DomainError):
            sample_gaussian(np.ones(2), 3, SeedSpec(0), rotation=np.eye(3))


class TestOrthogonal:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 12), st.integers(0, 2**32))
    def test_orthogonal(self, p, seed):
        q = random_orthogonal(p, SeedSpec(seed))
        np.testing.assert_allclose(q.T @ q, np.eye(p), atol=1e-12)

    def test_haar_first_column_uniform(self):
        # E[q_11^2] = 1/p under Haar measure
        p = 4
        vals = [random_orthogonal(p, SeedSpec(9, t))[0, 0] ** 2 for t in range(4000)]
        se = np.std(vals, ddof=1) / np.sqrt(len(vals))
        assert abs(np.mean(vals) - 1 / p) < 4 * se

    def test_population_covariance(self):
        np.testing.assert_array_equal(population_covariance([2.0, 1.0]), np.diag([2.0, 1.0]))
        v = random_orthogonal(3, SeedSpec(3))
        s = population_covariance([3.0, 2.0, 1.0], v)
        np.testing.assert_allclose(np.linalg.eigvalsh(s)[::-1], [3, 2, 1], atol=1e-12)
