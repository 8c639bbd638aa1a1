"""Brute-force reference computations used by the test suite.

Everything here is deliberately independent of the closed forms it
checks: kernel integrals are done by numerical quadrature, regression by
the dense textbook solve, and site derivatives by numerically integrated
tilted moments.  Each quadrature answer is accepted only when two rules
of different resolution agree, so a silent quadrature failure cannot
masquerade as a model bug.
"""

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .exceptions import InvalidConfigError, NumericalDomainError
from .likelihoods import GaussianNoise, LabelNoise

__all__ = [
    "QuadratureRule",
    "quad_blurred_cross",
    "quad_doubly_blurred",
    "exact_gp_regression",
    "tilted_moments_quadrature",
    "finite_diff",
]


@dataclass(frozen=True)
class QuadratureRule:
    """Resolution settings for the quadrature oracles.

    kind is one of ``adaptive-1d``, ``tensor-2d``, ``gauss-hermite``.
    ``nodes`` is the per-axis node count for the fixed-node rules and is
    ignored by the adaptive rule; ``abs_tol`` is the absolute accuracy the
    caller wants, and the dual-rule agreement check runs at ten times it.
    """

    kind: str = "gauss-hermite"
    nodes: int = 128
    abs_tol: float = 1e-9

    def __post_init__(self):
        if self.kind not in ("adaptive-1d", "tensor-2d", "gauss-hermite"):
            raise InvalidConfigError(f"unknown quadrature kind {self.kind!r}")
        if self.nodes < 1 or self.abs_tol <= 0:
            raise InvalidConfigError("nodes must be >= 1 and abs_tol positive")


def _dual_check(coarse, fine, tol, what):
    if abs(coarse - fine) > 10.0 * tol:
        raise NumericalDomainError(
            f"{what}: quadrature rules disagree "
            f"({coarse!r} vs {fine!r}, tol {tol!r})"
        )
    return fine


def _gauss_nodes(mean, cov, n):
    """Nodes and weights integrating f against N(. | mean, cov).

    Uses the eigendecomposition of cov so that zero eigenvalues collapse
    cleanly onto the mean.  Returns (points, weights) with points of
    shape (n^d, d).
    """
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    d = mean.shape[0]
    t, w = np.polynomial.hermite.hermgauss(n)
    evals, evecs = np.linalg.eigh(cov)
    evals = np.clip(evals, 0.0, None)
    root = evecs * np.sqrt(evals)
    grids = np.meshgrid(*([t] * d), indexing="ij")
    ts = np.stack([g.ravel() for g in grids], axis=-1)
    points = mean + np.sqrt(2.0) * ts @ root.T
    wgrids = np.meshgrid(*([w] * d), indexing="ij")
    weights = np.ones(len(ts))
    for g in wgrids:
        weights = weights * g.ravel()
    weights = weights / np.pi ** (d / 2.0)
    return points, weights


def _kernel_value(sigma, x, xp):
    diff = np.atleast_1d(x) - np.atleast_1d(xp)
    return np.exp(-0.5 * float(diff @ diff) / sigma**2)


def _blur_integral_1d(sigma, x, b, c, epsabs):
    sd = np.sqrt(c + sigma**2)

    def integrand(xp):
        dens = np.exp(-0.5 * (xp - b) ** 2 / c) / np.sqrt(2.0 * np.pi * c) if c > 0 else None
        return _kernel_value(sigma, x, np.array([xp])) * dens

    if c == 0:
        return _kernel_value(sigma, x, np.array([b]))
    lo, hi = b - 14.0 * sd, b + 14.0 * sd
    value, _ = integrate.quad(integrand, lo, hi, epsabs=epsabs, limit=400)
    return value


def _blur_integral_gh(sigma, x, center, cov, n):
    points, weights = _gauss_nodes(center, cov, n)
    vals = np.exp(
        -0.5 * np.sum((points - np.atleast_1d(x)) ** 2, axis=1) / sigma**2
    )
    return float(weights @ vals)


def quad_blurred_cross(kernel, x, basis, rule=QuadratureRule()):
    """Numerically integrate the kernel against one basis blur.

    Supports d <= 2.  The adaptive rule handles d=1 only; the fixed-node
    rules handle both dimensions.
    """
    d = kernel.dim
    if d > 2:
        raise InvalidConfigError("quadrature oracle supports d <= 2 only")
    x = np.asarray(x, dtype=float)
    if rule.kind == "adaptive-1d":
        if d != 1:
            raise InvalidConfigError("adaptive-1d requires d = 1")
        c = float(basis.cov[0, 0])
        coarse = _blur_integral_1d(
            kernel.sigma, x, float(basis.center[0]), c, epsabs=rule.abs_tol * 10
        )
        fine = _blur_integral_1d(
            kernel.sigma, x, float(basis.center[0]), c, epsabs=rule.abs_tol / 10
        )
    else:
        coarse = _blur_integral_gh(kernel.sigma, x, basis.center, basis.cov, rule.nodes)
        fine = _blur_integral_gh(
            kernel.sigma, x, basis.center, basis.cov, 2 * rule.nodes
        )
    return _dual_check(coarse, fine, rule.abs_tol, "blurred cross integral")


def quad_doubly_blurred(kernel, bi, bj, rule=QuadratureRule()):
    """Numerically integrate the kernel against two basis blurs.

    The kernel depends only on the difference of its arguments, and the
    difference of the two independent blur draws is Gaussian with mean
    b_i - b_j and covariance c_i + c_j.  The four-dimensional integral
    therefore collapses to one d-dimensional quadrature of the kernel
    against that difference Gaussian, which both rules evaluate.
    """
    d = kernel.dim
    if d > 2:
        raise InvalidConfigError("quadrature oracle supports d <= 2 only")
    mean = bi.center - bj.center
    cov = bi.cov + bj.cov
    if rule.kind == "adaptive-1d":
        if d != 1:
            raise InvalidConfigError("adaptive-1d requires d = 1")
        zero = np.zeros(1)
        coarse = _blur_integral_1d(
            kernel.sigma, zero, float(mean[0]), float(cov[0, 0]),
            epsabs=rule.abs_tol * 10,
        )
        fine = _blur_integral_1d(
            kernel.sigma, zero, float(mean[0]), float(cov[0, 0]),
            epsabs=rule.abs_tol / 10,
        )
    else:
        zero = np.zeros(d)
        coarse = _blur_integral_gh(kernel.sigma, zero, mean, cov, rule.nodes)
        fine = _blur_integral_gh(kernel.sigma, zero, mean, cov, 2 * rule.nodes)
    return _dual_check(coarse, fine, rule.abs_tol, "doubly blurred integral")


def exact_gp_regression(kernel, train_x, train_y, v_y, query):
    """Textbook dense GP regression at one query point.

    Returns the posterior (mean, var) of the latent function, computed by
    a direct solve against K + v_y I.  Intended for N <= 200.
    """
    train_x = np.asarray(train_x, dtype=float)
    train_y = np.asarray(train_y, dtype=float)
    query = np.asarray(query, dtype=float)
    n = train_x.shape[0]
    if n > 200:
        raise InvalidConfigError("dense oracle limited to N <= 200")
    diff = train_x[:, None, :] - train_x[None, :, :]
    gram = np.exp(-0.5 * np.sum(diff**2, axis=-1) / kernel.sigma**2)
    kq = np.exp(
        -0.5 * np.sum((train_x - query) ** 2, axis=-1) / kernel.sigma**2
    )
    solve = np.linalg.solve(gram + v_y * np.eye(n), np.column_stack([train_y, kq]))
    mean = float(kq @ solve[:, 0])
    var = float(1.0 - kq @ solve[:, 1])
    return mean, var


def _tilted_pieces_step(y, m, v, eps, epsabs):
    """Zeroth, first, second moments of the step likelihood times N(f|m,v).

    The step likelihood is discontinuous at f=0, so the integral is split
    there and each half-line handled by adaptive quadrature.
    """
    sd = np.sqrt(v)
    lo, hi = m - 14.0 * sd, m + 14.0 * sd
    w_pos = eps + (1.0 - 2.0 * eps) * (1.0 if y > 0 else 0.0)
    w_neg = eps + (1.0 - 2.0 * eps) * (1.0 if y < 0 else 0.0)

    def moments(power):
        def dens(f):
            return f**power * np.exp(-0.5 * (f - m) ** 2 / v) / np.sqrt(2.0 * np.pi * v)

        total = 0.0
        if hi > 0:
            part, _ = integrate.quad(dens, max(lo, 0.0), hi, epsabs=epsabs, limit=400)
            total += w_pos * part
        if lo < 0:
            part, _ = integrate.quad(dens, lo, min(hi, 0.0), epsabs=epsabs, limit=400)
            total += w_neg * part
        return total

    return moments(0), moments(1), moments(2)


def tilted_moments_quadrature(y, cavity_mean, cavity_var, lik, rule=QuadratureRule()):
    """Tilted-distribution moments and log-partition derivatives.

    Integrates p(y|f) N(f | cavity_mean, cavity_var) numerically and
    converts the tilted mean and variance into derivatives of log Z with
    the standard Gaussian identities.  Returns (Z, mean, var, dlogZ,
    d2logZ).
    """
    m, v = float(cavity_mean), float(cavity_var)
    if v <= 0:
        raise InvalidConfigError("cavity variance must be positive")
    if isinstance(lik, LabelNoise):
        coarse = _tilted_pieces_step(y, m, v, lik.epsilon, epsabs=rule.abs_tol * 10)
        fine = _tilted_pieces_step(y, m, v, lik.epsilon, epsabs=rule.abs_tol / 10)
        for a, b in zip(coarse, fine):
            _dual_check(a, b, rule.abs_tol, "tilted step moments")
        z0, z1, z2 = fine
    elif isinstance(lik, GaussianNoise):
        # Integrate against the narrower of the two Gaussians so the
        # remaining factor is at least as wide as the node spacing.
        if lik.v_y <= v:
            node_mean, node_var, other_mean, other_var = y, lik.v_y, m, v
        else:
            node_mean, node_var, other_mean, other_var = m, v, y, lik.v_y

        def moments(n):
            points, weights = _gauss_nodes(node_mean, [[node_var]], n)
            f = points[:, 0]
            other = np.exp(-0.5 * (f - other_mean) ** 2 / other_var) / np.sqrt(
                2.0 * np.pi * other_var
            )
            return (
                float(weights @ other),
                float(weights @ (other * f)),
                float(weights @ (other * f**2)),
            )

        coarse = moments(rule.nodes)
        fine = moments(2 * rule.nodes)
        for a, b in zip(coarse, fine):
            _dual_check(a, b, rule.abs_tol, "tilted Gaussian moments")
        z0, z1, z2 = fine
    else:
        raise InvalidConfigError(f"unsupported likelihood {type(lik).__name__}")
    if z0 <= 0:
        raise NumericalDomainError("tilted normalizer is not positive")
    mean = z1 / z0
    var = z2 / z0 - mean**2
    dlogz = (mean - m) / v
    d2logz = (var - v) / v**2
    return z0, mean, var, dlogz, d2logz


def finite_diff(fn, point, step=1e-5):
    """Centered first and second differences of a scalar function."""
    hi = fn(point + step)
    lo = fn(point - step)
    mid = fn(point)
    first = (hi - lo) / (2.0 * step)
    second = (hi - 2.0 * mid + lo) / step**2
    return first, second
