import numpy as np
import pytest
import scipy.stats

from rfcheck.datagen.sample import sample, sample_features
from rfcheck.errors import ConfigurationError
from rfcheck.oracle.components import LinearComponent, SineComponent
from rfcheck.oracle.model import AdditiveModel

additive = AdditiveModel(p=3, components=[LinearComponent(), LinearComponent()])


def noise_only(sigma=1.0, noise="gaussian"):
    return AdditiveModel(p=2, components=[], noise_sigma=sigma, noise=noise)


def test_noiseless_responses_equal_regression():
    model = AdditiveModel(p=2, components=[SineComponent(), LinearComponent(2.0)])
    dataset = sample(model, n=500, seed=1)
    np.testing.assert_array_equal(dataset.responses, model.regression(dataset.features))


def test_sample_is_deterministic():
    first = sample(noise_only(), n=300, seed=2)
    second = sample(noise_only(), n=300, seed=2)
    assert first == second
    assert first.digest() == second.digest()


def test_seeds_give_different_samples():
    assert sample(noise_only(), n=10, seed=3) != sample(noise_only(), n=10, seed=4)


def test_prefix_property():
    small = sample(noise_only(), n=50, seed=5)
    large = sample(noise_only(), n=200, seed=5)
    np.testing.assert_array_equal(small.features, large.features[:50])
    np.testing.assert_array_equal(small.responses, large.responses[:50])


def test_features_do_not_depend_on_noise():
    quiet = sample(noise_only(sigma=0.1), n=100, seed=6)
    loud = sample(noise_only(sigma=0.5), n=100, seed=6)
    np.testing.assert_array_equal(quiet.features, loud.features)
    np.testing.assert_allclose(loud.responses, 5 * quiet.responses, rtol=1e-12)


def test_provenance():
    dataset = sample(noise_only(sigma=0.25), n=5, seed=7)
    assert dataset.provenance.sigma == 0.25
    assert dataset.provenance.seed == 7
    assert dataset.provenance.model_digest == noise_only(sigma=0.25).digest()


@pytest.mark.parametrize(
    ["n", "seed"],
    [
        pytest.param(0, 1, id="no_rows"),
        pytest.param(10, -1, id="negative_seed"),
        pytest.param(10, 2**64, id="seed_too_large"),
    ],
)
def test_sample_errors(n, seed):
    with pytest.raises(ConfigurationError):
        sample(noise_only(), n=n, seed=seed)


class Test_moments:
    n = 100_000

    @pytest.mark.parametrize("noise", ["gaussian", "uniform"])
    def test_noise_moments(self, noise):
        responses = sample(noise_only(noise=noise), n=self.n, seed=8).responses
        assert responses.mean() == pytest.approx(0.0, abs=0.02)
        assert responses.var() == pytest.approx(1.0, abs=0.03)

    def test_uniform_noise_is_bounded(self):
        responses = sample(noise_only(noise="uniform"), n=self.n, seed=9).responses
        assert np.abs(responses).max() <= np.sqrt(3.0)

    def test_additive_mean(self):
        responses = sample(additive, n=self.n, seed=10).responses
        assert responses.mean() == pytest.approx(1.0, abs=0.02)

    def test_feature_columns_uncorrelated(self):
        features = sample_features(3, self.n, seed=11)
        correlations = np.corrcoef(features, rowvar=False)
        off_diagonal = correlations[~np.eye(3, dtype=bool)]
        assert np.abs(off_diagonal).max() < 0.02

    def test_features_uniform(self):
        features = sample_features(2, self.n, seed=12)
        assert features.min() >= 0.0 and features.max() < 1.0
        for column in features.T:
            assert scipy.stats.kstest(column, "uniform").pvalue > 1e-3

    def test_gaussian_noise_normal(self):
        responses = sample(noise_only(), n=self.n, seed=13).responses
        assert scipy.stats.kstest(responses, "norm").pvalue > 1e-3
