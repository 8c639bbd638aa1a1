"""Expectation propagation over the sparse blurred-basis posterior.

Each data point owns one scalar Gaussian message (g_i, tau_i) acting
along its projection onto the basis.  A sweep visits every point,
removes its message (deletion), moment-matches the true likelihood in
the resulting cavity (projection), and stores the refreshed message
(inclusion).  Sweeps repeat until no message moves more than the
tolerance.

Deletion and inclusion are carried out in natural-parameter form, so a
site with tau_i = 0 deletes as the exact identity and nothing ever
divides by tau.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .exceptions import CavityCollapseError, InvalidConfigError
from .kernels import blurred_vector, gram_khat
from .likelihoods import CavityMarginal, LabelNoise
from .posterior import PosteriorState, predict_cov, predict_mean

__all__ = [
    "SiteParams",
    "EpConfig",
    "compute_projection",
    "delete_site",
    "project_site",
    "include_site",
    "ep_fit",
    "predictive_class_probability",
]


@dataclass(frozen=True)
class SiteParams:
    """One data point's message: scalar naturals plus its cached projection."""

    g: float
    tau: float
    p: np.ndarray

    @property
    def active(self):
        return not (self.tau == 0.0 and self.g == 0.0)


@dataclass(frozen=True)
class EpConfig:
    """Loop-control settings for the sweep schedule.

    tol is the stopping threshold on the largest site-parameter change in
    a sweep.  damping blends new and old site naturals (1 means replace).
    shuffle visits points in a freshly seeded order each sweep instead of
    data order.  min_cavity_var is the floor below which a cavity is
    treated as collapsed and the site skipped for that sweep.
    """

    tol: float = 1e-6
    max_sweeps: int = 100
    damping: float = 1.0
    shuffle: bool = False
    seed: int = 0
    min_cavity_var: float = 1e-10

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidConfigError(f"tol must be positive, got {self.tol}")
        if self.max_sweeps < 1:
            raise InvalidConfigError(
                f"max_sweeps must be at least 1, got {self.max_sweeps}"
            )
        if not 0.0 < self.damping <= 1.0:
            raise InvalidConfigError(
                f"damping must lie in (0, 1], got {self.damping}"
            )
        if self.seed < 0:
            raise InvalidConfigError(f"seed must be nonnegative, got {self.seed}")
        if not self.min_cavity_var > 0:
            raise InvalidConfigError(
                f"min_cavity_var must be positive, got {self.min_cavity_var}"
            )


def compute_projection(khat_factor, ktilde_bx):
    """Project one point onto the basis: solve Khat p = Ktilde(B, x)."""
    return khat_factor.solve(ktilde_bx)


def _deletion(alpha, beta, kt, p, g_i, tau_i):
    """Remove site i's natural contribution along p from (alpha, beta).

    Returns the cavity weights plus the cavity marginal at the point.
    With tau_i = 0 every correction term is zero and the weights pass
    through unchanged.
    """
    h = p - beta @ kt
    s = kt @ h
    denom = 1.0 - tau_i * s
    m_post = kt @ alpha
    a_cav = alpha + h * (tau_i * (m_post - g_i) / denom)
    b_cav = beta - np.outer(h, h) * (tau_i / denom)
    b_cav = 0.5 * (b_cav + b_cav.T)
    m_cav = kt @ a_cav
    v_cav = 1.0 - kt @ (b_cav @ kt)
    return a_cav, b_cav, m_cav, v_cav


def _inclusion(a_cav, b_cav, kt, p, m_cav, dlogz, d2logz, g_i, tau_i, damping, floor):
    """Refresh site i from the cavity and fold it back into the weights.

    The raw matched site is damped against the old naturals before the
    rank-one inclusion.  Returns None when the damped precision would
    push the next cavity variance below the floor (the clamp case).
    """
    b_vec = p - b_cav @ kt
    sb = kt @ b_vec
    den3 = 1.0 + d2logz * sb
    tau_new = -d2logz / den3
    nu_new = tau_new * m_cav + dlogz / den3
    tau_d = (1 - damping) * tau_i + damping * tau_new
    nu_d = (1 - damping) * tau_i * g_i + damping * nu_new
    den2 = 1.0 + tau_d * sb
    if den2 <= floor:
        return None
    alpha = a_cav + b_vec * ((nu_d - tau_d * m_cav) / den2)
    beta = b_cav + np.outer(b_vec, b_vec) * (tau_d / den2)
    beta = 0.5 * (beta + beta.T)
    g_new = nu_d / tau_d if tau_d != 0 else 0.0
    return alpha, beta, g_new, tau_d


def delete_site(state, site, x, min_cavity_var=1e-10):
    """Remove one site's message; return the cavity state and marginal."""
    kt = blurred_vector(state.kernel, x, state.basis)
    a_cav, b_cav, m_cav, v_cav = _deletion(
        state.alpha, state.beta, kt, site.p, site.g, site.tau
    )
    if v_cav <= min_cavity_var:
        raise CavityCollapseError(
            f"cavity variance {v_cav} fell to or below {min_cavity_var}"
        )
    return state.updated(a_cav, b_cav), CavityMarginal(mean=m_cav, var=v_cav)


def project_site(cavity_state, x, p, dlogz, d2logz):
    """Moment-match the tilted distribution back into the weights.

    Undamped form: alpha gains the projected direction scaled by the
    first derivative, beta loses its outer product scaled by the second.
    """
    kt = blurred_vector(cavity_state.kernel, x, cavity_state.basis)
    b_vec = p - cavity_state.beta @ kt
    alpha = cavity_state.alpha + b_vec * dlogz
    beta = cavity_state.beta - np.outer(b_vec, b_vec) * d2logz
    return cavity_state.updated(alpha, beta)


def include_site(cavity_state, cavity, x, p, dlogz, d2logz, site, damping=1.0,
                 min_cavity_var=1e-10):
    """Damped site refresh plus inclusion into the cavity state.

    Returns (new_state, new_site, clamped).  When the update is clamped
    the state comes back None and the site unchanged; the caller should
    keep its pre-deletion state.
    """
    kt = blurred_vector(cavity_state.kernel, x, cavity_state.basis)
    result = _inclusion(
        cavity_state.alpha,
        cavity_state.beta,
        kt,
        p,
        cavity.mean,
        dlogz,
        d2logz,
        site.g,
        site.tau,
        damping,
        min_cavity_var,
    )
    if result is None:
        return None, site, True
    alpha, beta, g_new, tau_new = result
    new_state = cavity_state.updated(alpha, beta)
    return new_state, SiteParams(g=g_new, tau=tau_new, p=site.p), False


def ep_fit(data, kernel, basis, lik, cfg=EpConfig()):
    """Run damped EP sweeps to convergence over one dataset.

    Returns (state, sites, diagnostics).  Non-convergence within
    max_sweeps is not an error; diagnostics carry converged=False along
    with per-sweep skip and clamp counts.
    """
    n = len(data)
    if data.dim != kernel.dim:
        raise InvalidConfigError(
            f"data dimension {data.dim} does not match kernel dimension {kernel.dim}"
        )
    factor = gram_khat(kernel, basis)
    ktil = np.column_stack(
        [blurred_vector(kernel, data.inputs[i], basis) for i in range(n)]
    )
    proj = factor.solve(ktil)
    m = len(basis)
    alpha = np.zeros(m)
    beta = np.zeros((m, m))
    g = np.zeros(n)
    tau = np.zeros(n)
    order_rng = np.random.default_rng(cfg.seed) if cfg.shuffle else None
    skipped_per_sweep = []
    clamped_per_sweep = []
    converged = False
    max_delta = np.inf
    sweeps = cfg.max_sweeps
    for sweep in range(cfg.max_sweeps):
        maxd = 0.0
        skipped = 0
        clamped = 0
        order = order_rng.permutation(n) if order_rng is not None else range(n)
        for i in order:
            kt = ktil[:, i]
            p = proj[:, i]
            a_cav, b_cav, m_cav, v_cav = _deletion(alpha, beta, kt, p, g[i], tau[i])
            if v_cav <= cfg.min_cavity_var:
                skipped += 1
                continue
            dlogz, d2logz, _ = lik.site_derivatives(
                data.targets[i], CavityMarginal(mean=m_cav, var=v_cav)
            )
            result = _inclusion(
                a_cav, b_cav, kt, p, m_cav, dlogz, d2logz, g[i], tau[i],
                cfg.damping, cfg.min_cavity_var,
            )
            if result is None:
                clamped += 1
                continue
            alpha, beta, g_new, tau_new = result
            maxd = max(maxd, abs(g_new - g[i]), abs(tau_new - tau[i]))
            g[i] = g_new
            tau[i] = tau_new
        skipped_per_sweep.append(skipped)
        clamped_per_sweep.append(clamped)
        max_delta = maxd
        if maxd < cfg.tol:
            converged = True
            sweeps = sweep + 1
            break
    state = PosteriorState(
        alpha=alpha, beta=beta, basis=basis, kernel=kernel, khat=factor
    )
    sites = [SiteParams(g=g[i], tau=tau[i], p=proj[:, i]) for i in range(n)]
    diagnostics = {
        "sweeps": sweeps,
        "converged": converged,
        "max_delta": float(max_delta),
        "skipped_sites_per_sweep": skipped_per_sweep,
        "clamped_sites_per_sweep": clamped_per_sweep,
        "total_site_visits": sweeps * n,
    }
    return state, sites, diagnostics


def predictive_class_probability(state, x, lik):
    """Probability of label +1 at x under the label-noise model.

    Pushes the latent mean through the probit at the spread sqrt(1 + V)
    and mixes in the flip rate.
    """
    if not isinstance(lik, LabelNoise):
        raise InvalidConfigError("class probabilities need a LabelNoise likelihood")
    mean = predict_mean(state, x)
    var = predict_cov(state, x, x)
    psi = ndtr(mean / np.sqrt(1.0 + var))
    return float(lik.epsilon + (1.0 - 2.0 * lik.epsilon) * psi)
