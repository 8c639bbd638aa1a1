"""Sparse posterior state in natural form and its prediction rules.

The posterior over the latent function is carried entirely by a weight
vector alpha and a matrix beta defined on the basis set: the predictive
mean is a blurred-kernel dot product with alpha and the predictive
covariance subtracts a beta quadratic form from the plain kernel.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .exceptions import IllConditionedBasisError, InvalidConfigError
from .kernels import blurred_vector, gram_khat, rbf_eval

__all__ = [
    "PosteriorState",
    "BasisMoments",
    "prior_state",
    "natural_from_virtual",
    "predict_mean",
    "predict_cov",
    "basis_moments",
]


@dataclass(frozen=True)
class PosteriorState:
    """Posterior weights (alpha, beta) tied to a kernel and basis set.

    ``khat`` caches the factorized doubly blurred Gram matrix so that
    repeated projections and moment evaluations reuse one factorization.
    States are treated as immutable; the inference loop builds updated
    copies via ``updated``.
    """

    alpha: np.ndarray
    beta: np.ndarray
    basis: object
    kernel: object
    khat: object = field(repr=False)

    def __post_init__(self):
        m = len(self.basis)
        if self.alpha.shape != (m,) or self.beta.shape != (m, m):
            raise InvalidConfigError(
                f"weights must have shapes ({m},) and ({m}, {m}), "
                f"got {self.alpha.shape} and {self.beta.shape}"
            )
        scale = max(1.0, float(np.max(np.abs(self.beta))))
        if np.max(np.abs(self.beta - self.beta.T)) > 1e-10 * scale:
            raise InvalidConfigError("beta must be symmetric")

    def updated(self, alpha, beta):
        """Copy of this state with new weights (beta symmetrized)."""
        return replace(self, alpha=alpha, beta=0.5 * (beta + beta.T))


@dataclass(frozen=True)
class BasisMoments:
    """Posterior mean and covariance projected onto the basis points."""

    mean: np.ndarray
    cov: np.ndarray


def prior_state(kernel, basis):
    """State with zero weights: mean 0 everywhere, covariance the prior."""
    m = len(basis)
    return PosteriorState(
        alpha=np.zeros(m),
        beta=np.zeros((m, m)),
        basis=basis,
        kernel=kernel,
        khat=gram_khat(kernel, basis),
    )


def natural_from_virtual(kernel, basis, u, prior_cov):
    """State whose weights encode virtual observations u on the basis.

    Solves beta = (prior_cov + Lambda^-1)^-1 and alpha = beta u, where
    Lambda holds the basis precisions.  prior_cov is the prior basis
    covariance (the doubly blurred Gram matrix when the prior mean is
    zero).
    """
    u = np.asarray(u, dtype=float)
    prior_cov = np.asarray(prior_cov, dtype=float)
    m = len(basis)
    if u.shape != (m,) or prior_cov.shape != (m, m):
        raise InvalidConfigError("u and prior_cov must match the basis size")
    precisions = basis.precisions
    if np.any(precisions <= 0):
        raise InvalidConfigError("all basis precisions must be positive")
    total = prior_cov + np.diag(1.0 / precisions)
    try:
        factor = cho_factor(total, lower=True)
    except LinAlgError as exc:
        raise IllConditionedBasisError(
            "prior basis covariance plus virtual noise is singular"
        ) from exc
    beta = cho_solve(factor, np.eye(m))
    beta = 0.5 * (beta + beta.T)
    return PosteriorState(
        alpha=beta @ u,
        beta=beta,
        basis=basis,
        kernel=kernel,
        khat=gram_khat(kernel, basis),
    )


def predict_mean(state, x):
    """Posterior mean at x: blurred kernel row times alpha."""
    return float(blurred_vector(state.kernel, x, state.basis) @ state.alpha)


def predict_cov(state, x, xp):
    """Posterior covariance between x and xp.

    Subtracts the beta quadratic form from the plain kernel value.  The
    quadratic form is averaged over both evaluation orders so swapping
    the arguments returns the bit-identical value.
    """
    u = blurred_vector(state.kernel, x, state.basis)
    w = blurred_vector(state.kernel, xp, state.basis)
    quad = 0.5 * (u @ (state.beta @ w) + w @ (state.beta @ u))
    return float(rbf_eval(state.kernel, x, xp) - quad)


def basis_moments(state):
    """Posterior mean and covariance on the basis points themselves."""
    khat = state.khat.matrix
    cov = khat - khat @ state.beta @ khat
    return BasisMoments(mean=khat @ state.alpha, cov=0.5 * (cov + cov.T))
