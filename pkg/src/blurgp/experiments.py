"""Desk-scale comparative experiments and the benchmark table.

Two standing protocols compare the three covariance modes: quadrant
regression on a noisy circle (RMSE against the noise-free circle) and
two nested Gaussian classes (test error rate).  Repeat r draws data with
seed base+r and clusters with seed base+1000+r, so all modes share the
same data within a repeat.
"""

import numpy as np

from .basis import CovMode, kmeans, local_covariances
from .data import (
    CLASSIFICATION,
    REGRESSION,
    circle_grid,
    fmt,
    load_csv,
    split,
    synth_circle,
    synth_gaussian_classes,
)
from .ep import EpConfig, ep_fit
from .exceptions import BlurGpError, InvalidConfigError
from .kernels import BasisSet, BlurredBasis, RbfKernel
from .likelihoods import GaussianNoise, LabelNoise
from .posterior import basis_moments, predict_mean

__all__ = [
    "MODES",
    "CIRCLE_DEFAULTS",
    "CLASSES_DEFAULTS",
    "fit_once",
    "circle_protocol",
    "classes_protocol",
    "benchmark",
    "write_benchmark_csv",
]

MODES = ("full", "sphere", "zero")

CIRCLE_DEFAULTS = {
    "sigma": 0.1,
    "v_y": 1.0,
    "m": 4,
    "n": 100,
    "base_seed": 4,
    "repeats": 10,
}

CLASSES_DEFAULTS = {
    "sigma": 0.7,
    "epsilon": 0.0,
    "m": 3,
    "n_train": 200,
    "n_test": 2000,
    "base_seed": 0,
    "repeats": 10,
    "damping": 0.5,
}


def _fit_record(diagnostics, state):
    moments = basis_moments(state)
    eigenvalues = np.linalg.eigvalsh(moments.cov)
    return {
        "sweeps": diagnostics["sweeps"],
        "converged": diagnostics["converged"],
        "skipped": int(sum(diagnostics["skipped_sites_per_sweep"])),
        "clamped": int(sum(diagnostics["clamped_sites_per_sweep"])),
        "visits": diagnostics["total_site_visits"],
        "vb_min_eig": float(eigenvalues.min()),
        "vb_max_diag": float(np.max(np.diag(moments.cov))),
    }


def fit_once(train, sigma, m, mode, lik, cfg, kmeans_seed, ridge=1e-6):
    """Cluster, build the basis in one mode, run EP.

    Returns (state, record) where record carries the convergence and
    health numbers the protocols aggregate.
    """
    kernel = RbfKernel(sigma=sigma, dim=train.dim)
    clustering = kmeans(train.inputs, m, kmeans_seed)
    basis, _ = local_covariances(
        clustering, train.inputs, CovMode(kind=mode, ridge=ridge)
    )
    state, _, diagnostics = ep_fit(train, kernel, basis, lik, cfg)
    return state, _fit_record(diagnostics, state)


def _mean_predictions(state, inputs):
    return np.array([predict_mean(state, x) for x in inputs])


def circle_protocol(sigma=None, v_y=None, m=None, n=None, base_seed=None,
                    repeats=None, modes=MODES, n_grid=200, noise_xy=0.05,
                    noise_y=0.1, cfg=None):
    """Quadrant regression on the circle, all covariance modes, paired seeds.

    Evaluates RMSE on an even noise-free grid of the unit circle.
    Returns {"metric": {mode: array}, "fits": {mode: [record, ...]}}.
    """
    d = CIRCLE_DEFAULTS
    sigma = d["sigma"] if sigma is None else sigma
    v_y = d["v_y"] if v_y is None else v_y
    m = d["m"] if m is None else m
    n = d["n"] if n is None else n
    base_seed = d["base_seed"] if base_seed is None else base_seed
    repeats = d["repeats"] if repeats is None else repeats
    cfg = EpConfig() if cfg is None else cfg
    grid_inputs, grid_targets = circle_grid(n_grid)
    lik = GaussianNoise(v_y=v_y)
    metric = {mode: [] for mode in modes}
    fits = {mode: [] for mode in modes}
    for r in range(repeats):
        seed = base_seed + r
        train = synth_circle(n=n, noise_xy=noise_xy, noise_y=noise_y, seed=seed)
        for mode in modes:
            state, record = fit_once(
                train, sigma, m, mode, lik, cfg, kmeans_seed=seed + 1000
            )
            mu = _mean_predictions(state, grid_inputs)
            metric[mode].append(float(np.sqrt(np.mean((mu - grid_targets) ** 2))))
            fits[mode].append(record)
    return {
        "metric": {mode: np.array(vals) for mode, vals in metric.items()},
        "fits": fits,
    }


def classes_protocol(sigma=None, epsilon=None, m=None, n_train=None,
                     n_test=None, base_seed=None, repeats=None, modes=MODES,
                     cfg=None):
    """Nested Gaussian classes, all covariance modes, paired seeds.

    Evaluates the error rate of the latent-mean sign on the held-out
    draw.  Returns the same structure as circle_protocol.
    """
    d = CLASSES_DEFAULTS
    sigma = d["sigma"] if sigma is None else sigma
    epsilon = d["epsilon"] if epsilon is None else epsilon
    m = d["m"] if m is None else m
    n_train = d["n_train"] if n_train is None else n_train
    n_test = d["n_test"] if n_test is None else n_test
    base_seed = d["base_seed"] if base_seed is None else base_seed
    repeats = d["repeats"] if repeats is None else repeats
    cfg = EpConfig(damping=d["damping"]) if cfg is None else cfg
    lik = LabelNoise(epsilon=epsilon)
    metric = {mode: [] for mode in modes}
    fits = {mode: [] for mode in modes}
    for r in range(repeats):
        seed = base_seed + r
        train, test = synth_gaussian_classes(
            n_train=n_train, n_test=n_test, seed=seed
        )
        for mode in modes:
            state, record = fit_once(
                train, sigma, m, mode, lik, cfg, kmeans_seed=seed + 1000
            )
            mu = _mean_predictions(state, test.inputs)
            metric[mode].append(float(np.mean(np.sign(mu) != test.targets)))
            fits[mode].append(record)
    return {
        "metric": {mode: np.array(vals) for mode, vals in metric.items()},
        "fits": fits,
    }


def _exact_gp_means(sigma, train_inputs, train_targets, v_y, queries):
    diff = train_inputs[:, None, :] - train_inputs[None, :, :]
    gram = np.exp(-0.5 * np.sum(diff**2, axis=-1) / sigma**2)
    weights = np.linalg.solve(
        gram + v_y * np.eye(len(train_inputs)), train_targets
    )
    cross = np.exp(
        -0.5
        * np.sum((queries[:, None, :] - train_inputs[None, :, :]) ** 2, axis=-1)
        / sigma**2
    )
    return cross @ weights


def _points_basis(inputs):
    d = inputs.shape[1]
    zero = np.zeros((d, d))
    return BasisSet(
        bases=tuple(BlurredBasis(center=row, cov=zero) for row in inputs)
    )


def _benchmark_data(dataset, task, r, base_seed, n, n_train, n_test,
                    train_fraction, loaded):
    seed = base_seed + r
    if dataset == "synth-circle":
        train = synth_circle(n=n, seed=seed)
        grid_inputs, grid_targets = circle_grid()
        return train, grid_inputs, grid_targets
    if dataset == "synth-classes":
        train, test = synth_gaussian_classes(
            n_train=n_train, n_test=n_test, seed=seed
        )
        return train, test.inputs, test.targets
    train, test = split(loaded, train_fraction, seed=seed)
    return train, test.inputs, test.targets


def benchmark(dataset, m_list, modes, repeats, base_seed=0, task=None,
              sigma=None, v_y=None, epsilon=0.0, damping=None, n=100,
              n_train=200, n_test=2000, train_fraction=0.5, ridge=1e-6,
              cfg=None, reference=True):
    """Grid of (M, mode, repeat) fits plus a dense-model reference.

    ``dataset`` is "synth-circle", "synth-classes", or a CSV path (then
    ``task`` must be given).  Returns result rows as dicts in
    deterministic (M, mode, repeat) order; the reference rows follow.
    A failed fit yields a NaN value, not an aborted table.
    """
    if dataset == "synth-circle":
        task = REGRESSION
        loaded = None
    elif dataset == "synth-classes":
        task = CLASSIFICATION
        loaded = None
    else:
        if task not in (REGRESSION, CLASSIFICATION):
            raise InvalidConfigError(
                "benchmarks on a CSV dataset need task 'regression' or "
                f"'classification', got {task!r}"
            )
        loaded = load_csv(dataset, task)
    if sigma is None:
        sigma = CIRCLE_DEFAULTS["sigma"] if dataset == "synth-circle" else (
            CLASSES_DEFAULTS["sigma"] if dataset == "synth-classes" else 0.5
        )
    if v_y is None:
        v_y = CIRCLE_DEFAULTS["v_y"] if dataset == "synth-circle" else 0.1
    if damping is None:
        damping = 1.0 if task == REGRESSION else CLASSES_DEFAULTS["damping"]
    if cfg is None:
        cfg = EpConfig(damping=damping)
    if task == REGRESSION:
        lik = GaussianNoise(v_y=v_y)
        metric = "rmse"
    else:
        lik = LabelNoise(epsilon=epsilon)
        metric = "error-rate"

    def evaluate(state, inputs, targets):
        mu = _mean_predictions(state, inputs)
        if task == REGRESSION:
            return float(np.sqrt(np.mean((mu - targets) ** 2)))
        return float(np.mean(np.sign(mu) != targets))

    rows = []
    for m in m_list:
        for mode in modes:
            for r in range(repeats):
                train, test_inputs, test_targets = _benchmark_data(
                    dataset, task, r, base_seed, n, n_train, n_test,
                    train_fraction, loaded,
                )
                try:
                    state, record = fit_once(
                        train, sigma, m, mode, lik, cfg,
                        kmeans_seed=base_seed + 1000 + r, ridge=ridge,
                    )
                    value = evaluate(state, test_inputs, test_targets)
                    sweeps = record["sweeps"]
                    converged = record["converged"]
                except BlurGpError:
                    value, sweeps, converged = float("nan"), 0, False
                rows.append(
                    {
                        "dataset": dataset,
                        "M": m,
                        "mode": mode,
                        "repeat": r,
                        "metric": metric,
                        "value": value,
                        "sweeps": sweeps,
                        "converged": converged,
                    }
                )
    if reference:
        for r in range(repeats):
            train, test_inputs, test_targets = _benchmark_data(
                dataset, task, r, base_seed, n, n_train, n_test,
                train_fraction, loaded,
            )
            try:
                if task == REGRESSION:
                    if len(train) > 500:
                        continue
                    mu = _exact_gp_means(
                        sigma, train.inputs, train.targets, v_y, test_inputs
                    )
                    value = float(np.sqrt(np.mean((mu - test_targets) ** 2)))
                    sweeps, converged = 0, True
                else:
                    kernel = RbfKernel(sigma=sigma, dim=train.dim)
                    basis = _points_basis(train.inputs)
                    state, _, diagnostics = ep_fit(train, kernel, basis, lik, cfg)
                    value = evaluate(state, test_inputs, test_targets)
                    sweeps = diagnostics["sweeps"]
                    converged = diagnostics["converged"]
            except BlurGpError:
                value, sweeps, converged = float("nan"), 0, False
            rows.append(
                {
                    "dataset": dataset,
                    "M": len(train),
                    "mode": "full-gp",
                    "repeat": r,
                    "metric": metric,
                    "value": value,
                    "sweeps": sweeps,
                    "converged": converged,
                }
            )
    return rows


def write_benchmark_csv(rows, path):
    """Write benchmark rows with stable formatting (rerun gives same bytes)."""
    with open(path, "w", newline="") as handle:
        handle.write("dataset,M,mode,repeat,metric,value,sweeps,converged\n")
        for row in rows:
            handle.write(
                f"{row['dataset']},{row['M']},{row['mode']},{row['repeat']},"
                f"{row['metric']},{fmt(row['value'])},{row['sweeps']},"
                f"{'true' if row['converged'] else 'false'}\n"
            )
