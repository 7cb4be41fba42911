"""
Sample datasets from additive models.

Features and noise come from separate streams keyed by the seed, so
changing the noise level (or its distribution) leaves the feature draws
untouched. Features are drawn row by row, so samples of different sizes
under one seed share their leading rows. Gaussian noise is produced by
inverse-transform sampling: a uniform draw u in (0, 1) maps to
sigma * Phi^-1(u).
"""

import logging

import numpy as np

from rfcheck.datagen.dataset import Dataset, Provenance
from rfcheck.errors import ConfigurationError
from rfcheck.oracle.model import AdditiveModel
from rfcheck.streams import Stream, check_seed, make_stream


def sample_features(p: int, n: int, seed: int, stream: int = Stream.FEATURES) -> np.ndarray:
    """n points uniform on [0, 1]^p."""
    return make_stream(seed, stream).random((n, p))


def sample_noise(model: AdditiveModel, n: int, seed: int) -> np.ndarray:
    if model.noise_sigma == 0:
        return np.zeros(n)
    from scipy.special import ndtri

    rng = make_stream(seed, Stream.NOISE)
    # random() draws from [0, 1) and ndtri(0) is -inf
    uniform = rng.random(n)
    uniform = np.where(uniform == 0.0, np.nextafter(0.0, 1.0), uniform)
    if model.noise == "uniform":
        half_width = model.noise_sigma * np.sqrt(3.0)
        return half_width * (2.0 * uniform - 1.0)
    return model.noise_sigma * ndtri(uniform)


def sample(model: AdditiveModel, n: int, seed: int, model_digest: str = None) -> Dataset:
    """
    Draw n rows: X uniform on [0, 1]^p and Y = m(X) + noise.
    Deterministic in (model, n, seed).
    """
    if n < 1:
        raise ConfigurationError(f"n must be at least 1: {n}")
    seed = check_seed(seed)
    features = sample_features(model.p, n, seed)
    responses = model.regression(features) + sample_noise(model, n, seed)
    provenance = Provenance(
        sigma=model.noise_sigma,
        seed=seed,
        model_digest=model_digest or model.digest(),
    )
    logging.debug(f"sampled n={n} rows from model with p={model.p} under seed {seed}")
    return Dataset(features, responses, provenance)
