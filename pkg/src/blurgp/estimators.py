"""Scikit-learn style front ends for the clustering + EP pipeline.

Both estimators cluster the training inputs, attach local covariances in
the chosen mode, and run EP.  Hyperparameters follow the scikit-learn
convention: stored verbatim in __init__, consumed in fit, fitted state
on trailing-underscore attributes.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .basis import CovMode, kmeans, local_covariances
from .data import CLASSIFICATION, REGRESSION, Dataset
from .ep import EpConfig, ep_fit, predictive_class_probability
from .kernels import RbfKernel
from .likelihoods import GaussianNoise, LabelNoise
from .posterior import predict_cov, predict_mean

__all__ = ["BlurredGpRegressor", "BlurredGpClassifier"]


class _BlurredGpBase(BaseEstimator):
    def _fit_common(self, X, y, task, lik, damping):
        n, d = X.shape
        if not 1 <= self.n_basis <= n:
            raise ValueError(
                f"n_basis must lie in [1, {n}] for {n} samples, got {self.n_basis}"
            )
        train = Dataset(inputs=X, targets=y, task=task)
        kernel = RbfKernel(sigma=self.sigma, dim=d)
        clustering = kmeans(X, self.n_basis, self.random_state)
        basis, fallbacks = local_covariances(
            clustering, X, CovMode(kind=self.cov_mode, ridge=self.ridge)
        )
        cfg = EpConfig(
            tol=self.tol,
            max_sweeps=self.max_sweeps,
            damping=damping,
            shuffle=self.shuffle,
            seed=self.random_state,
            min_cavity_var=self.min_cavity_var,
        )
        state, sites, diagnostics = ep_fit(train, kernel, basis, lik, cfg)
        self.state_ = state
        self.sites_ = sites
        self.diagnostics_ = diagnostics
        self.sphere_fallbacks_ = fallbacks
        self.n_features_in_ = d
        return self

    def _check_predict_input(self, X):
        check_is_fitted(self, "state_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"expected {self.n_features_in_} features, got {X.shape[1]}"
            )
        return X

    def _latent_mean(self, X):
        return np.array([predict_mean(self.state_, x) for x in X])


class BlurredGpRegressor(_BlurredGpBase, RegressorMixin):
    """GP regression on a small blurred basis, trained by EP.

    Parameters mirror the pipeline stages: sigma is the kernel width,
    n_basis the number of K-means clusters, cov_mode how cluster spread
    becomes basis blur ("full", "sphere", or "zero"), v_y the observation
    noise variance.  random_state seeds the clustering (and the sweep
    order when shuffle is on).
    """

    def __init__(self, sigma=0.5, n_basis=4, cov_mode="full", ridge=1e-6,
                 v_y=0.1, tol=1e-6, max_sweeps=100, damping=1.0,
                 shuffle=False, min_cavity_var=1e-10, random_state=0):
        self.sigma = sigma
        self.n_basis = n_basis
        self.cov_mode = cov_mode
        self.ridge = ridge
        self.v_y = v_y
        self.tol = tol
        self.max_sweeps = max_sweeps
        self.damping = damping
        self.shuffle = shuffle
        self.min_cavity_var = min_cavity_var
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        return self._fit_common(
            X, y.astype(float), REGRESSION, GaussianNoise(v_y=self.v_y),
            self.damping,
        )

    def predict(self, X, return_std=False):
        """Predictive mean, optionally with the observation-level std.

        The returned standard deviation covers a new noisy observation:
        latent variance plus v_y.
        """
        X = self._check_predict_input(X)
        mean = self._latent_mean(X)
        if not return_std:
            return mean
        var = np.array(
            [predict_cov(self.state_, x, x) for x in X]
        ) + self.v_y
        return mean, np.sqrt(np.clip(var, 0.0, None))


class BlurredGpClassifier(_BlurredGpBase, ClassifierMixin):
    """Binary GP classification on a small blurred basis, trained by EP.

    Uses the step likelihood on the latent sign with flip rate epsilon.
    Accepts any two label values; classes_ holds them sorted, and the
    second one plays the role of the positive class.
    """

    def __init__(self, sigma=0.7, n_basis=3, cov_mode="full", ridge=1e-6,
                 epsilon=0.0, tol=1e-6, max_sweeps=100, damping=0.5,
                 shuffle=False, min_cavity_var=1e-10, random_state=0):
        self.sigma = sigma
        self.n_basis = n_basis
        self.cov_mode = cov_mode
        self.ridge = ridge
        self.epsilon = epsilon
        self.tol = tol
        self.max_sweeps = max_sweeps
        self.damping = damping
        self.shuffle = shuffle
        self.min_cavity_var = min_cavity_var
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_, indices = np.unique(y, return_inverse=True)
        if len(self.classes_) != 2:
            raise ValueError(
                f"need exactly 2 classes, got {len(self.classes_)}"
            )
        targets = np.where(indices == 1, 1.0, -1.0)
        self.lik_ = LabelNoise(epsilon=self.epsilon)
        return self._fit_common(
            X, targets, CLASSIFICATION, self.lik_, self.damping
        )

    def decision_function(self, X):
        """Latent posterior mean; positive favors classes_[1]."""
        X = self._check_predict_input(X)
        return self._latent_mean(X)

    def predict_proba(self, X):
        """Column-stacked probabilities in classes_ order."""
        X = self._check_predict_input(X)
        pos = np.array(
            [predictive_class_probability(self.state_, x, self.lik_) for x in X]
        )
        return np.column_stack([1.0 - pos, pos])

    def predict(self, X):
        X = self._check_predict_input(X)
        return self.classes_[(self._latent_mean(X) > 0).astype(int)]
