"""Tests for the RBF kernel and its blurred integrals."""

import numpy as np
import pytest

from blurgp.exceptions import InvalidConfigError
from blurgp.kernels import (
    BasisSet,
    BlurredBasis,
    RbfKernel,
    blurred_cross,
    blurred_vector,
    doubly_blurred,
    gram_khat,
    rbf_eval,
)


def point_basis(center, cov=None):
    center = np.asarray(center, dtype=float)
    d = center.shape[0]
    cov = np.zeros((d, d)) if cov is None else np.asarray(cov, dtype=float)
    return BlurredBasis(center=center, cov=cov)


class TestRbfKernel:
    def test_rejects_nonpositive_sigma(self):
        """Zero or negative length scales are configuration errors."""
        with pytest.raises(InvalidConfigError):
            RbfKernel(sigma=0.0, dim=1)
        with pytest.raises(InvalidConfigError):
            RbfKernel(sigma=-1.0, dim=1)

    def test_rejects_bad_dim(self):
        """Dimension below one is a configuration error."""
        with pytest.raises(InvalidConfigError):
            RbfKernel(sigma=1.0, dim=0)

    def test_eval_at_same_point_is_one(self):
        """k(x, x) = 1 for any x."""
        kernel = RbfKernel(sigma=0.7, dim=2)
        x = np.array([0.3, -1.2])
        assert rbf_eval(kernel, x, x) == 1.0

    def test_eval_at_distance_sigma(self):
        """One length scale of separation gives exp(-1/2)."""
        kernel = RbfKernel(sigma=0.5, dim=1)
        value = rbf_eval(kernel, np.array([0.0]), np.array([0.5]))
        np.testing.assert_allclose(value, 0.60653065971263342, rtol=1e-15)

    def test_eval_is_symmetric(self):
        """Swapping the arguments does not change the value."""
        kernel = RbfKernel(sigma=1.3, dim=2)
        x = np.array([0.1, 0.4])
        xp = np.array([-0.7, 2.0])
        assert rbf_eval(kernel, x, xp) == rbf_eval(kernel, xp, x)

    def test_eval_rejects_wrong_length(self):
        """Vectors must match the kernel dimension."""
        kernel = RbfKernel(sigma=1.0, dim=2)
        with pytest.raises(InvalidConfigError):
            rbf_eval(kernel, np.array([1.0]), np.array([0.0, 0.0]))


class TestBlurredBasis:
    def test_rejects_matrix_center(self):
        """Centers must be flat vectors."""
        with pytest.raises(InvalidConfigError):
            BlurredBasis(center=np.zeros((2, 1)), cov=np.zeros((2, 2)))

    def test_rejects_shape_mismatch(self):
        """The covariance must be d by d for a d-vector center."""
        with pytest.raises(InvalidConfigError):
            BlurredBasis(center=np.zeros(2), cov=np.zeros((3, 3)))

    def test_rejects_asymmetric_cov(self):
        """A covariance with an asymmetric off-diagonal is rejected."""
        cov = np.array([[1.0, 0.5], [0.2, 1.0]])
        with pytest.raises(InvalidConfigError):
            BlurredBasis(center=np.zeros(2), cov=cov)

    def test_rejects_negative_definite_cov(self):
        """A covariance with a negative eigenvalue is rejected."""
        cov = np.array([[1.0, 0.0], [0.0, -0.1]])
        with pytest.raises(InvalidConfigError):
            BlurredBasis(center=np.zeros(2), cov=cov)

    def test_accepts_zero_cov(self):
        """The zero matrix (a point mass) is a valid blur."""
        basis = point_basis([1.0, 2.0])
        assert basis.dim == 2
        np.testing.assert_array_equal(basis.cov, np.zeros((2, 2)))

    def test_rejects_nonpositive_precision(self):
        """Virtual-target precision must be positive."""
        with pytest.raises(InvalidConfigError):
            BlurredBasis(center=np.zeros(1), cov=np.zeros((1, 1)), precision=0.0)


class TestBasisSet:
    def test_rejects_empty(self):
        """At least one basis is required."""
        with pytest.raises(InvalidConfigError):
            BasisSet(bases=())

    def test_rejects_mixed_dimensions(self):
        """All bases must share one input dimension."""
        with pytest.raises(InvalidConfigError):
            BasisSet(bases=(point_basis([0.0]), point_basis([0.0, 0.0])))

    def test_collection_protocol(self):
        """Length, iteration, indexing, and stacked centers line up."""
        bases = (point_basis([0.0, 0.0]), point_basis([1.0, -1.0]))
        basis_set = BasisSet(bases=bases)
        assert len(basis_set) == 2
        assert basis_set[1] is bases[1]
        assert [b.dim for b in basis_set] == [2, 2]
        np.testing.assert_array_equal(
            basis_set.centers, np.array([[0.0, 0.0], [1.0, -1.0]])
        )

    def test_parameter_arrays(self):
        """Precision and virtual-target vectors follow basis order."""
        bases = (
            BlurredBasis(center=np.zeros(1), cov=np.zeros((1, 1)),
                         precision=2.0, virtual_target=0.5),
            BlurredBasis(center=np.ones(1), cov=np.zeros((1, 1)),
                         precision=3.0, virtual_target=-0.5),
        )
        basis_set = BasisSet(bases=bases)
        np.testing.assert_array_equal(basis_set.precisions, [2.0, 3.0])
        np.testing.assert_array_equal(basis_set.virtual_targets, [0.5, -0.5])


class TestBlurredCross:
    def test_zero_blur_reduces_to_kernel(self):
        """With c = 0 the integral collapses to the plain kernel value."""
        kernel = RbfKernel(sigma=0.8, dim=2)
        x = np.array([0.4, -0.3])
        basis = point_basis([1.0, 1.0])
        np.testing.assert_allclose(
            blurred_cross(kernel, x, basis),
            rbf_eval(kernel, x, basis.center),
            rtol=1e-14,
        )

    def test_known_one_dimensional_value(self):
        """Unit blur, unit sigma, unit separation gives exp(-1/4)/sqrt(2)."""
        kernel = RbfKernel(sigma=1.0, dim=1)
        basis = point_basis([0.0], cov=[[1.0]])
        value = blurred_cross(kernel, np.array([1.0]), basis)
        np.testing.assert_allclose(value, 0.55069531490318369, rtol=1e-15)

    def test_blur_shrinks_peak_value(self):
        """At x = b the blurred value is sigma^d / (c + sigma^2)^(d/2) < 1."""
        kernel = RbfKernel(sigma=1.0, dim=1)
        basis = point_basis([0.0], cov=[[1.0]])
        value = blurred_cross(kernel, np.array([0.0]), basis)
        np.testing.assert_allclose(value, 0.70710678118654746, rtol=1e-15)

    def test_decays_with_distance(self):
        """Values fall monotonically as x moves away from the center."""
        kernel = RbfKernel(sigma=0.5, dim=1)
        basis = point_basis([0.0], cov=[[0.3]])
        values = [
            blurred_cross(kernel, np.array([t]), basis)
            for t in (0.0, 0.5, 1.0, 2.0)
        ]
        assert values == sorted(values, reverse=True)

    def test_rejects_wrong_length(self):
        """The query must match the kernel dimension."""
        kernel = RbfKernel(sigma=1.0, dim=2)
        with pytest.raises(InvalidConfigError):
            blurred_cross(kernel, np.array([0.0]), point_basis([0.0, 0.0]))


class TestBlurredVector:
    def test_matches_per_basis_calls(self):
        """The vector is just the per-basis values in order."""
        kernel = RbfKernel(sigma=0.6, dim=2)
        basis_set = BasisSet(
            bases=(
                point_basis([0.0, 0.0], cov=0.1 * np.eye(2)),
                point_basis([1.0, 0.5]),
            )
        )
        x = np.array([0.2, 0.2])
        expected = [blurred_cross(kernel, x, b) for b in basis_set]
        np.testing.assert_array_equal(blurred_vector(kernel, x, basis_set), expected)


class TestDoublyBlurred:
    def test_symmetric_in_bases(self):
        """Swapping the two bases returns the identical value."""
        kernel = RbfKernel(sigma=0.9, dim=2)
        bi = point_basis([0.0, 0.0], cov=[[0.5, 0.1], [0.1, 0.4]])
        bj = point_basis([1.0, -0.5], cov=[[0.2, 0.0], [0.0, 0.8]])
        assert doubly_blurred(kernel, bi, bj) == doubly_blurred(kernel, bj, bi)

    def test_zero_blurs_reduce_to_kernel(self):
        """Two point masses give back the plain kernel."""
        kernel = RbfKernel(sigma=1.1, dim=2)
        bi = point_basis([0.0, 0.0])
        bj = point_basis([0.7, -0.2])
        np.testing.assert_allclose(
            doubly_blurred(kernel, bi, bj),
            rbf_eval(kernel, bi.center, bj.center),
            rtol=1e-14,
        )

    def test_matches_blurred_cross_when_one_blur_vanishes(self):
        """K-hat with one zero blur equals the single-blur cross term."""
        kernel = RbfKernel(sigma=0.7, dim=1)
        bi = point_basis([0.3], cov=[[0.6]])
        bj = point_basis([-0.4])
        np.testing.assert_allclose(
            doubly_blurred(kernel, bi, bj),
            blurred_cross(kernel, bj.center, bi),
            rtol=1e-14,
        )

    def test_total_blur_is_what_matters(self):
        """Splitting one blur across both bases leaves the value unchanged."""
        kernel = RbfKernel(sigma=1.0, dim=1)
        split = doubly_blurred(
            kernel,
            point_basis([0.0], cov=[[0.5]]),
            point_basis([1.0], cov=[[0.5]]),
        )
        lumped = doubly_blurred(
            kernel,
            point_basis([0.0], cov=[[1.0]]),
            point_basis([1.0]),
        )
        np.testing.assert_allclose(split, lumped, rtol=1e-14)


class TestGramKhat:
    def test_matrix_is_symmetric_psd(self):
        """The Gram matrix is exactly symmetric with nonnegative spectrum."""
        rng = np.random.default_rng(0)
        kernel = RbfKernel(sigma=0.8, dim=2)
        bases = []
        for _ in range(6):
            a = rng.standard_normal((2, 2))
            bases.append(
                BlurredBasis(center=rng.uniform(-1, 1, 2), cov=0.2 * a @ a.T)
            )
        factor = gram_khat(kernel, BasisSet(bases=tuple(bases)))
        np.testing.assert_array_equal(factor.matrix, factor.matrix.T)
        assert np.linalg.eigvalsh(factor.matrix).min() > -1e-12

    def test_solve_inverts_jittered_matrix(self):
        """solve returns x with (matrix + jitter I) x = rhs."""
        kernel = RbfKernel(sigma=1.0, dim=1)
        basis_set = BasisSet(
            bases=tuple(point_basis([t], cov=[[0.1]]) for t in (-1.0, 0.0, 1.0))
        )
        factor = gram_khat(kernel, basis_set)
        rhs = np.array([1.0, -2.0, 0.5])
        x = factor.solve(rhs)
        lhs = (factor.matrix + factor.jitter * np.eye(3)) @ x
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_jitter_is_relative_to_diagonal(self):
        """The recorded jitter is the requested level times the mean diagonal."""
        kernel = RbfKernel(sigma=1.0, dim=1)
        basis_set = BasisSet(bases=(point_basis([0.0]), point_basis([2.0])))
        factor = gram_khat(kernel, basis_set)
        scale = float(np.mean(np.diag(factor.matrix)))
        np.testing.assert_allclose(factor.jitter, 1e-10 * scale, rtol=1e-12)
