"""RBF kernel and its Gaussian-blurred integrals in closed form.

The model blurs each basis point with a Gaussian, so the kernel enters
everywhere through two integrals: the cross term between a point and a
blurred basis, and the doubly blurred term between two bases.  Both have
closed forms; densities are evaluated in log domain and exponentiated
once so that higher input dimensions stay stable.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .exceptions import IllConditionedBasisError, InvalidConfigError

__all__ = [
    "RbfKernel",
    "BlurredBasis",
    "BasisSet",
    "rbf_eval",
    "blurred_cross",
    "blurred_vector",
    "doubly_blurred",
    "gram_khat",
    "GramFactor",
]

_JITTER_START = 1e-10
_JITTER_STOP = 1e-6


@dataclass(frozen=True)
class RbfKernel:
    """Squared-exponential kernel exp(-||x - x'||^2 / (2 sigma^2)).

    Parameters
    ----------
    sigma : float
        Length scale, in the same units as the input coordinates.
    dim : int
        Input dimension d.
    """

    sigma: float
    dim: int

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidConfigError(f"sigma must be positive, got {self.sigma}")
        if int(self.dim) < 1:
            raise InvalidConfigError(f"dim must be >= 1, got {self.dim}")


@dataclass(frozen=True)
class BlurredBasis:
    """One basis point with its Gaussian blur and virtual-target parameters.

    Parameters
    ----------
    center : ndarray
        Location b_k, shape (d,).
    cov : ndarray
        Symmetric PSD blur covariance c_k, shape (d, d).  The zero matrix
        is a supported value (a point mass, no blur).
    precision : float
        Precision lambda_k of the virtual target.  Only read when a
        posterior is built from explicit virtual observations; the EP fit
        replaces it with per-data-point messages.
    virtual_target : float
        Virtual observation u_k at this basis point.
    """

    center: np.ndarray
    cov: np.ndarray
    precision: float = 1e6
    virtual_target: float = 0.0

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if center.ndim != 1:
            raise InvalidConfigError("basis center must be a 1-D vector")
        d = center.shape[0]
        if cov.shape != (d, d):
            raise InvalidConfigError(
                f"basis cov must have shape ({d}, {d}), got {cov.shape}"
            )
        if not np.allclose(cov, cov.T, atol=1e-12):
            raise InvalidConfigError("basis cov must be symmetric")
        if np.linalg.eigvalsh(cov).min() < -1e-12:
            raise InvalidConfigError("basis cov must be positive semidefinite")
        if not self.precision > 0:
            raise InvalidConfigError("basis precision must be positive")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self):
        return self.center.shape[0]


@dataclass(frozen=True)
class BasisSet:
    """Ordered collection of blurred basis points sharing one dimension."""

    bases: tuple

    def __post_init__(self):
        bases = tuple(self.bases)
        if len(bases) < 1:
            raise InvalidConfigError("a basis set needs at least one basis")
        d = bases[0].dim
        if any(b.dim != d for b in bases):
            raise InvalidConfigError("all bases must share one input dimension")
        object.__setattr__(self, "bases", bases)

    def __len__(self):
        return len(self.bases)

    def __iter__(self):
        return iter(self.bases)

    def __getitem__(self, i):
        return self.bases[i]

    @property
    def dim(self):
        return self.bases[0].dim

    @property
    def centers(self):
        """All centers stacked into an (M, d) array."""
        return np.stack([b.center for b in self.bases])

    @property
    def precisions(self):
        return np.array([b.precision for b in self.bases])

    @property
    def virtual_targets(self):
        return np.array([b.virtual_target for b in self.bases])


def _log_gauss(diff, cov):
    """log N(diff | 0, cov) via a Cholesky factor of cov."""
    d = diff.shape[0]
    chol = np.linalg.cholesky(cov)
    z = np.linalg.solve(chol, diff)
    return (
        -0.5 * d * np.log(2.0 * np.pi)
        - np.sum(np.log(np.diag(chol)))
        - 0.5 * z @ z
    )


def rbf_eval(kernel, x, xp):
    """Plain kernel value exp(-||x - xp||^2 / (2 sigma^2))."""
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    if x.shape != (kernel.dim,) or xp.shape != (kernel.dim,):
        raise InvalidConfigError(
            f"expected vectors of length {kernel.dim}, got {x.shape} and {xp.shape}"
        )
    diff = x - xp
    return float(np.exp(-0.5 * (diff @ diff) / kernel.sigma**2))


def blurred_cross(kernel, x, basis):
    """Kernel integrated against one basis blur.

    Computes the integral of k(x, x') against N(x' | b, c), which has the
    closed form (2 pi sigma^2)^(d/2) N(x | b, c + sigma^2 I).  The
    exponent is the input dimension d over two.
    """
    x = np.asarray(x, dtype=float)
    d = kernel.dim
    if x.shape != (d,):
        raise InvalidConfigError(f"expected a vector of length {d}, got {x.shape}")
    cov = basis.cov + kernel.sigma**2 * np.eye(d)
    log_norm = 0.5 * d * np.log(2.0 * np.pi * kernel.sigma**2)
    return float(np.exp(log_norm + _log_gauss(x - basis.center, cov)))


def blurred_vector(kernel, x, basis_set):
    """Row vector of blurred_cross values over a whole basis set."""
    return np.array([blurred_cross(kernel, x, b) for b in basis_set])


def doubly_blurred(kernel, bi, bj):
    """Kernel integrated against two basis blurs.

    The closed form is (2 pi sigma^2)^(d/2) N(b_i | b_j, c_i + c_j +
    sigma^2 I), symmetric in the two bases.
    """
    d = kernel.dim
    cov = bi.cov + bj.cov + kernel.sigma**2 * np.eye(d)
    log_norm = 0.5 * d * np.log(2.0 * np.pi * kernel.sigma**2)
    return float(np.exp(log_norm + _log_gauss(bi.center - bj.center, cov)))


@dataclass(frozen=True)
class GramFactor:
    """Doubly blurred Gram matrix with a cached Cholesky-style factor.

    ``matrix`` is the Gram matrix before any jitter; ``jitter`` is the
    absolute amount that was added to the diagonal to factorize it.
    """

    matrix: np.ndarray
    jitter: float
    _cho: tuple = field(repr=False, default=None)

    def solve(self, rhs):
        """Solve (matrix + jitter I) x = rhs via the cached factor."""
        return cho_solve(self._cho, rhs)


def gram_khat(kernel, basis_set, jitter=_JITTER_START):
    """Build the doubly blurred Gram matrix and factorize it.

    Jitter is relative to the average diagonal entry and escalates by
    factors of ten up to 1e-6 if the factorization fails; beyond that the
    matrix is reported as ill conditioned rather than silently repaired.
    """
    m = len(basis_set)
    khat = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            khat[i, j] = khat[j, i] = doubly_blurred(
                kernel, basis_set[i], basis_set[j]
            )
    scale = float(np.mean(np.diag(khat)))
    attempted = []
    level = jitter
    while level <= _JITTER_STOP * 1.01:
        absolute = level * scale
        attempted.append(absolute)
        try:
            cho = cho_factor(khat + absolute * np.eye(m), lower=True)
        except np.linalg.LinAlgError:
            level *= 10.0
            continue
        return GramFactor(matrix=khat, jitter=absolute, _cho=cho)
    raise IllConditionedBasisError(
        f"basis Gram matrix of size {m} could not be factorized "
        f"after jitter escalation",
        attempted_jitters=attempted,
    )
