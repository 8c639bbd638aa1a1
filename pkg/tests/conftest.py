"""Shared fixtures: one small fitted model per task.

Both fixtures are session scoped; tests treat the fitted state as
read-only.
"""

import pytest

from blurgp.basis import CovMode, kmeans, local_covariances
from blurgp.data import synth_circle, synth_gaussian_classes
from blurgp.ep import EpConfig, ep_fit
from blurgp.kernels import RbfKernel
from blurgp.likelihoods import GaussianNoise, LabelNoise


@pytest.fixture(scope="session")
def fitted_regression():
    """Small circle regression fit: (train, state, sites, diagnostics, lik)."""
    train = synth_circle(n=40, seed=1)
    kernel = RbfKernel(sigma=0.3, dim=2)
    clustering = kmeans(train.inputs, 4, seed=1)
    basis, _ = local_covariances(clustering, train.inputs, CovMode(kind="full"))
    lik = GaussianNoise(v_y=0.5)
    state, sites, diagnostics = ep_fit(train, kernel, basis, lik, EpConfig())
    return train, state, sites, diagnostics, lik


@pytest.fixture(scope="session")
def fitted_classification():
    """Small two-class fit: (train, state, sites, diagnostics, lik)."""
    train, _ = synth_gaussian_classes(n_train=60, n_test=2, seed=1)
    kernel = RbfKernel(sigma=0.7, dim=2)
    clustering = kmeans(train.inputs, 3, seed=1)
    basis, _ = local_covariances(clustering, train.inputs, CovMode(kind="full"))
    lik = LabelNoise(epsilon=0.0)
    state, sites, diagnostics = ep_fit(
        train, kernel, basis, lik, EpConfig(damping=0.5)
    )
    return train, state, sites, diagnostics, lik
