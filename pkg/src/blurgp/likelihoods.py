"""Observation models and their site-derivative rules.

Each likelihood knows how to differentiate the log normalizer of its
tilted distribution with respect to the cavity mean.  Those two
derivatives are the only thing the inference loop needs from an
observation model, so adding a likelihood means adding one rule here.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr

from .exceptions import InvalidConfigError, NumericalDomainError

__all__ = [
    "CavityMarginal",
    "GaussianNoise",
    "LabelNoise",
    "site_derivatives_regression",
    "site_derivatives_classification",
]

_LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class CavityMarginal:
    """Marginal belief at one input with that point's own message removed."""

    mean: float
    var: float

    def __post_init__(self):
        if not self.var > 0:
            raise InvalidConfigError(f"cavity variance must be positive, got {self.var}")


@dataclass(frozen=True)
class GaussianNoise:
    """Additive observation noise with variance v_y, for regression."""

    v_y: float = 0.1

    def __post_init__(self):
        if not self.v_y > 0:
            raise InvalidConfigError(f"v_y must be positive, got {self.v_y}")

    def site_derivatives(self, y, cavity):
        return site_derivatives_regression(y, cavity, self)


@dataclass(frozen=True)
class LabelNoise:
    """Step likelihood on the latent sign with flip probability epsilon."""

    epsilon: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 0.5:
            raise InvalidConfigError(
                f"epsilon must lie in [0, 0.5), got {self.epsilon}"
            )

    def site_derivatives(self, y, cavity):
        return site_derivatives_classification(y, cavity, self)


def site_derivatives_regression(y, cavity, lik):
    """First and second log-normalizer derivatives for Gaussian noise.

    Returns (dlogZ, d2logZ, logZ), all in closed form: the tilted
    normalizer is N(y | cavity mean, v_y + cavity var).
    """
    total = lik.v_y + cavity.var
    resid = y - cavity.mean
    dlogz = resid / total
    d2logz = -1.0 / total
    logz = -0.5 * (resid**2 / total + np.log(total) + _LOG_2PI)
    return dlogz, d2logz, logz


def site_derivatives_classification(y, cavity, lik):
    """First and second log-normalizer derivatives for the step likelihood.

    Returns (dlogZ, d2logZ, logZ) for Z = eps + (1-2eps) Psi(z) with
    z = y m / sqrt(v).  The ratio N(z)/Z underflows to 0/0 for very
    negative z, so the eps=0 branch works in log space throughout;
    log_ndtr supplies the asymptotic tail of log Psi.
    """
    if y not in (-1.0, 1.0):
        raise InvalidConfigError(f"classification labels must be +/-1, got {y}")
    m, v = cavity.mean, cavity.var
    sd = np.sqrt(v)
    z = y * m / sd
    eps = lik.epsilon
    log_phi = -0.5 * (z**2 + _LOG_2PI)
    if eps == 0.0:
        logz = log_ndtr(z)
        gamma = np.exp(log_phi - logz - 0.5 * np.log(v))
    else:
        zval = eps + (1.0 - 2.0 * eps) * ndtr(z)
        if not zval > 0:
            raise NumericalDomainError(f"tilted normalizer {zval} is not positive")
        logz = np.log(zval)
        gamma = (1.0 - 2.0 * eps) * np.exp(log_phi) / (zval * sd)
    dlogz = gamma * y
    d2logz = -gamma * (m * y + v * gamma) / v
    return dlogz, d2logz, logz
