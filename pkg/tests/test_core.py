import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gendisc.core import (
    Approach,
    AugmentedDataset,
    CategoricalDist,
    GaussianDist,
    InvGammaDist,
    LabelKind,
    LabeledDataset,
    NIGPrior,
    SeededRng,
    UnlabeledSet,
    as_observation_bundle,
    categorical_sample,
    empirical_categorical,
    gaussian_sample,
    sample_categorical_rows,
)


class TestSeededRng:
    def test_same_seed_same_draw(self):
        d = GaussianDist(0.0, 1.0)
        assert gaussian_sample(d, SeededRng(7)) == gaussian_sample(d, SeededRng(7))

    def test_streams_differ(self):
        a = SeededRng(7, 0).gen.random(1000)
        b = SeededRng(7, 1).gen.random(1000)
        assert not np.array_equal(a, b)
        # no cross-stream replay at any small offset
        for shift in range(5):
            assert not np.array_equal(a[shift : shift + 100], b[:100])
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.1

    def test_child_is_deterministic(self):
        r = SeededRng(3, 2)
        np.testing.assert_array_equal(r.child(4).gen.random(5), SeededRng(3, 2).child(4).gen.random(5))
        assert not np.array_equal(r.child(4).gen.random(5), r.child(5).gen.random(5))

    def test_u64_bounds(self):
        SeededRng(2**64 - 1, 2**64 - 1)
        with pytest.raises(ValueError):
            SeededRng(-1)
        with pytest.raises(ValueError):
            SeededRng(2**64)


class TestGaussianDist:
    def test_rejects_tiny_variance(self):
        with pytest.raises(ValueError):
            GaussianDist(5.0, 1e-12)
        with pytest.raises(ValueError):
            GaussianDist(0.0, 0.0)

    def test_moments_of_draws(self):
        x = GaussianDist(2.0, 9.0).sample(SeededRng(11), size=10**6)
        assert abs(x.mean() - 2.0) < 0.02
        assert abs(x.var() - 9.0) < 0.1

    @given(st.floats(-50, 50), st.floats(1e-3, 1e3))
    @settings(max_examples=40, deadline=None)
    def test_pdf_integrates_to_one(self, mean, var):
        d = GaussianDist(mean, var)
        grid = np.linspace(mean - 10 * d.sd, mean + 10 * d.sd, 20001)
        assert abs(np.trapezoid(d.pdf(grid), grid) - 1.0) < 1e-6

    def test_cdf_matches_pdf(self):
        d = GaussianDist(1.0, 4.0)
        grid = np.linspace(-20, 3.0, 200001)
        np.testing.assert_allclose(np.trapezoid(d.pdf(grid), grid), d.cdf(3.0), atol=1e-8)


class TestInvGamma:
    def test_invalid(self):
        with pytest.raises(ValueError):
            InvGammaDist(0.0, 1.0)
        with pytest.raises(ValueError):
            InvGammaDist(1.0, -1.0)

    def test_sample_mean(self):
        d = InvGammaDist(3.0, 2.0)
        x = d.sample(SeededRng(1), size=10**5)
        assert abs(x.mean() / d.mean - 1) < 0.02

    def test_logpdf_normalized(self):
        d = InvGammaDist(3.0, 2.0)
        grid = np.linspace(1e-4, 60, 400001)
        assert abs(np.trapezoid(np.exp(d.logpdf(grid)), grid) - 1) < 1e-4


class TestCategorical:
    def test_degenerate(self):
        d = CategoricalDist([1.0, 0.0, 0.0])
        rng = SeededRng(0)
        assert all(categorical_sample(d, rng) == 1 for _ in range(200))

    @pytest.mark.parametrize("probs", [[1 / 3, 1 / 3, 1 / 3], [1 / 2, 1 / 3, 1 / 6]])
    def test_frequencies(self, probs):
        d = CategoricalDist(probs)
        draws = d.sample(SeededRng(5), size=3 * 10**5)
        freq = np.bincount(draws, minlength=4)[1:] / draws.size
        np.testing.assert_allclose(freq, probs, atol=0.005)

    @given(st.lists(st.floats(0.0, 10.0), min_size=2, max_size=8).filter(lambda p: sum(p) > 1e-3))
    def test_renormalization_idempotent(self, p):
        d = CategoricalDist(p)
        assert abs(d.probs.sum() - 1) < 1e-12
        assert (d.probs >= 0).all()
        np.testing.assert_array_equal(CategoricalDist(d.probs).probs, d.probs)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            CategoricalDist([0.5, -0.1, 0.6])

    def test_rows_sampler_is_one_based(self):
        probs = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=float)
        np.testing.assert_array_equal(sample_categorical_rows(probs, SeededRng(0)), [2, 3, 1])

    def test_empirical(self):
        est = empirical_categorical([1, 1, 2, 3], 3)
        np.testing.assert_allclose(est.probs, [0.5, 0.25, 0.25])


class TestPriorAndData:
    def test_nig_requires_pd(self):
        with pytest.raises(ValueError):
            NIGPrior(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))
        with pytest.raises(ValueError):
            NIGPrior(np.zeros(2), np.eye(2), shape=0.0)

    def test_empty_dataset(self):
        d = LabeledDataset.empty(1)
        assert len(d) == 0 and d.dim == 1

    def test_dataset_kind_checked(self):
        with pytest.raises(ValueError):
            LabeledDataset([0.5, 1.0], [[1.0], [2.0]], LabelKind.CATEGORICAL)
        with pytest.raises(ValueError):
            LabeledDataset([0, 1], [[1.0], [2.0]], LabelKind.CATEGORICAL)

    def test_augmented_is_a_view(self):
        base = LabeledDataset([1.0, 2.0], [[1.0], [2.0]], LabelKind.CONTINUOUS)
        aug = base.augmented(np.array([3.0]), np.array([[3.0]]))
        assert isinstance(aug, AugmentedDataset)
        assert len(aug) == 3
        first, _ = next(iter(aug.parts()))
        assert np.shares_memory(first, base.xs)

    def test_unlabeled_kind_must_match(self):
        u = UnlabeledSet(np.zeros((3, 1)), CategoricalDist([0.5, 0.5]))
        with pytest.raises(ValueError):
            u.check_compatible(LabeledDataset.empty(1, LabelKind.CONTINUOUS))

    def test_bundle(self):
        assert as_observation_bundle(0.3, 1).shape == (1, 1)
        assert as_observation_bundle([0.1, 0.2], 1).shape == (2, 1)
        with pytest.raises(ValueError):
            as_observation_bundle([], 1)

    def test_approach_parse(self):
        assert Approach.parse("g") is Approach.GENERATIVE
        assert Approach.parse("Discriminative") is Approach.DISCRIMINATIVE
        with pytest.raises(ValueError):
            Approach.parse("x")
