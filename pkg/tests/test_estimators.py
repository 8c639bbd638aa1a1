"""Tests for the scikit-learn style estimator front ends."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from blurgp.data import synth_circle, synth_gaussian_classes
from blurgp.estimators import BlurredGpClassifier, BlurredGpRegressor
from blurgp.exceptions import InvalidConfigError


@pytest.fixture(scope="module")
def circle_xy():
    train = synth_circle(n=60, seed=0)
    return train.inputs, train.targets


@pytest.fixture(scope="module")
def classes_xy():
    train, _ = synth_gaussian_classes(n_train=80, n_test=2, seed=0)
    return train.inputs, train.targets


class TestParamPlumbing:
    def test_get_params_round_trips(self):
        """Constructor arguments come back verbatim from get_params."""
        est = BlurredGpRegressor(sigma=0.9, n_basis=6, v_y=0.25)
        params = est.get_params()
        assert params["sigma"] == 0.9
        assert params["n_basis"] == 6
        assert params["v_y"] == 0.25
        rebuilt = BlurredGpRegressor(**params)
        assert rebuilt.get_params() == params

    def test_set_params_returns_self(self):
        """set_params mutates in place and chains."""
        est = BlurredGpClassifier()
        assert est.set_params(epsilon=0.1) is est
        assert est.epsilon == 0.1

    def test_clone_copies_hyperparameters(self, circle_xy):
        """A fitted estimator clones back to its unfitted configuration."""
        X, y = circle_xy
        est = BlurredGpRegressor(n_basis=3, v_y=0.5).fit(X, y)
        fresh = clone(est)
        assert fresh.get_params() == est.get_params()
        assert not hasattr(fresh, "state_")


class TestRegressor:
    def test_fit_predict_shapes(self, circle_xy):
        """fit returns self and predict matches the query count."""
        X, y = circle_xy
        est = BlurredGpRegressor(v_y=0.5)
        assert est.fit(X, y) is est
        mean = est.predict(X[:7])
        assert mean.shape == (7,)
        assert est.n_features_in_ == 2

    def test_return_std_includes_observation_noise(self, circle_xy):
        """Predictive spread never drops below the noise floor."""
        X, y = circle_xy
        est = BlurredGpRegressor(v_y=0.5).fit(X, y)
        mean, std = est.predict(X[:10], return_std=True)
        assert std.shape == (10,)
        assert np.all(std >= np.sqrt(0.5) * 0.999)

    def test_fit_improves_on_mean_baseline(self, circle_xy):
        """Training R^2 is positive on the ring dataset."""
        X, y = circle_xy
        est = BlurredGpRegressor(v_y=0.5).fit(X, y)
        assert est.score(X, y) > 0.2

    def test_predict_before_fit_raises(self):
        """An unfitted estimator refuses to predict."""
        with pytest.raises(NotFittedError):
            BlurredGpRegressor().predict(np.zeros((1, 2)))

    def test_feature_count_mismatch_raises(self, circle_xy):
        """Queries must match the fitted feature count."""
        X, y = circle_xy
        est = BlurredGpRegressor().fit(X, y)
        with pytest.raises(ValueError):
            est.predict(np.zeros((2, 3)))

    def test_n_basis_bounds(self, circle_xy):
        """n_basis outside [1, n_samples] is rejected at fit time."""
        X, y = circle_xy
        with pytest.raises(ValueError):
            BlurredGpRegressor(n_basis=0).fit(X, y)
        with pytest.raises(ValueError):
            BlurredGpRegressor(n_basis=len(X) + 1).fit(X, y)

    def test_unknown_cov_mode_rejected(self, circle_xy):
        """A bogus covariance mode fails fast."""
        X, y = circle_xy
        with pytest.raises(InvalidConfigError):
            BlurredGpRegressor(cov_mode="banana").fit(X, y)

    def test_same_seed_same_predictions(self, circle_xy):
        """Refitting with one random_state reproduces predictions exactly."""
        X, y = circle_xy
        first = BlurredGpRegressor(random_state=3).fit(X, y).predict(X[:5])
        second = BlurredGpRegressor(random_state=3).fit(X, y).predict(X[:5])
        np.testing.assert_array_equal(first, second)

    def test_cov_modes_all_fit(self, circle_xy):
        """Every covariance mode produces a working model."""
        X, y = circle_xy
        for mode in ("full", "sphere", "zero"):
            est = BlurredGpRegressor(cov_mode=mode, v_y=0.5).fit(X, y)
            assert est.predict(X[:3]).shape == (3,)
            assert isinstance(est.sphere_fallbacks_, tuple)
            assert est.diagnostics_["sweeps"] >= 1


class TestClassifier:
    def test_classes_are_sorted_unique_labels(self, classes_xy):
        """classes_ holds both labels in sorted order."""
        X, y = classes_xy
        est = BlurredGpClassifier().fit(X, y)
        np.testing.assert_array_equal(est.classes_, [-1.0, 1.0])

    def test_string_labels_work(self, classes_xy):
        """Any two label values are accepted and returned verbatim."""
        X, y = classes_xy
        names = np.where(y > 0, "inner", "outer")
        est = BlurredGpClassifier().fit(X, names)
        np.testing.assert_array_equal(est.classes_, ["inner", "outer"])
        predictions = est.predict(X[:10])
        assert set(predictions) <= {"inner", "outer"}

    def test_predict_proba_rows_sum_to_one(self, classes_xy):
        """Probability rows are proper two-class distributions."""
        X, y = classes_xy
        est = BlurredGpClassifier(epsilon=0.05).fit(X, y)
        proba = est.predict_proba(X[:20])
        assert proba.shape == (20, 2)
        np.testing.assert_allclose(proba.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(proba >= 0.05 - 1e-12)
        assert np.all(proba <= 0.95 + 1e-12)

    def test_decision_function_sign_matches_predict(self, classes_xy):
        """Positive latent means map to the second class."""
        X, y = classes_xy
        est = BlurredGpClassifier().fit(X, y)
        scores = est.decision_function(X)
        predictions = est.predict(X)
        np.testing.assert_array_equal(
            predictions == est.classes_[1], scores > 0
        )

    def test_rejects_wrong_class_count(self, classes_xy):
        """One class or three classes is an error."""
        X, _ = classes_xy
        with pytest.raises(ValueError):
            BlurredGpClassifier().fit(X, np.zeros(len(X)))
        y3 = np.arange(len(X)) % 3
        with pytest.raises(ValueError):
            BlurredGpClassifier().fit(X, y3)

    def test_learns_the_nested_classes(self, classes_xy):
        """Training accuracy clears the coin-flip baseline comfortably."""
        X, y = classes_xy
        est = BlurredGpClassifier().fit(X, y)
        assert est.score(X, y) > 0.7

    def test_same_seed_same_probabilities(self, classes_xy):
        """Refitting with one random_state reproduces probabilities."""
        X, y = classes_xy
        first = BlurredGpClassifier(random_state=5).fit(X, y).predict_proba(X[:5])
        second = BlurredGpClassifier(random_state=5).fit(X, y).predict_proba(X[:5])
        np.testing.assert_array_equal(first, second)
