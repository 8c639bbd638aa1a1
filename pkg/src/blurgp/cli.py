"""Command line front end.

Subcommands: synth, fit, predict, eval, grid, benchmark, oracle.  Every
command is deterministic given its flags; seeds are always flags.  Exit
codes: 0 success, 2 usage error, 3 data error, 4 numerical error.
"""

import argparse
import json
import sys

import numpy as np

from .basis import CovMode, kmeans, local_covariances
from .data import (
    CLASSIFICATION,
    REGRESSION,
    fmt,
    load_csv,
    load_inputs,
    synth_circle,
    synth_gaussian_classes,
    write_csv,
)
from .ep import EpConfig, ep_fit, predictive_class_probability
from .exceptions import (
    BlurGpError,
    DataFormatError,
    IllConditionedBasisError,
    InvalidConfigError,
    NumericalDomainError,
)
from .experiments import (
    CIRCLE_DEFAULTS,
    CLASSES_DEFAULTS,
    MODES,
    benchmark,
    write_benchmark_csv,
)
from .kernels import BlurredBasis, RbfKernel, blurred_cross
from .likelihoods import GaussianNoise, LabelNoise
from .oracles import QuadratureRule, exact_gp_regression, quad_blurred_cross
from .posterior import predict_cov, predict_mean
from .serialize import load_model, save_model

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

_TASKS = {"reg": REGRESSION, "class": CLASSIFICATION}


def _parse_int_list(text):
    try:
        return [int(part) for part in text.split(",") if part]
    except ValueError as exc:
        raise InvalidConfigError(f"bad integer list {text!r}") from exc


def _parse_mode_list(text):
    modes = [part for part in text.split(",") if part]
    for mode in modes:
        if mode not in MODES:
            raise InvalidConfigError(f"unknown covariance mode {mode!r}")
    return modes


def cmd_synth(args):
    if args.generator == "circle":
        data = synth_circle(
            n=args.n, noise_xy=args.noise_xy, noise_y=args.noise_y,
            seed=args.seed,
        )
        write_csv(data, args.out)
        print(json.dumps({"written": [args.out], "rows": len(data)}))
    else:
        train, test = synth_gaussian_classes(
            n_train=args.train, n_test=args.test, seed=args.seed
        )
        write_csv(train, args.out_train)
        write_csv(test, args.out_test)
        print(
            json.dumps(
                {
                    "written": [args.out_train, args.out_test],
                    "rows": [len(train), len(test)],
                }
            )
        )
    return EXIT_OK


def _task_defaults(args):
    task = _TASKS[args.task]
    if task == REGRESSION:
        sigma = CIRCLE_DEFAULTS["sigma"] if args.sigma is None else args.sigma
        damping = 1.0 if args.damping is None else args.damping
        m = CIRCLE_DEFAULTS["m"] if args.m is None else args.m
        lik = GaussianNoise(v_y=args.vy)
    else:
        sigma = CLASSES_DEFAULTS["sigma"] if args.sigma is None else args.sigma
        damping = CLASSES_DEFAULTS["damping"] if args.damping is None else args.damping
        m = CLASSES_DEFAULTS["m"] if args.m is None else args.m
        lik = LabelNoise(epsilon=args.eps)
    return task, sigma, damping, m, lik


def cmd_fit(args):
    task, sigma, damping, m, lik = _task_defaults(args)
    train = load_csv(args.data, task)
    if m > len(train):
        raise InvalidConfigError(
            f"m={m} exceeds the {len(train)} training points"
        )
    kernel = RbfKernel(sigma=sigma, dim=train.dim)
    clustering = kmeans(train.inputs, m, args.seed)
    basis, fallbacks = local_covariances(
        clustering, train.inputs, CovMode(kind=args.cov, ridge=args.ridge)
    )
    cfg = EpConfig(
        tol=args.tol,
        max_sweeps=args.max_sweeps,
        damping=damping,
        shuffle=args.shuffle,
        seed=args.seed,
        min_cavity_var=args.min_cavity_var,
    )
    state, _, diagnostics = ep_fit(train, kernel, basis, lik, cfg)
    save_model(args.out, state, lik, cfg, args.seed)
    report = dict(diagnostics)
    report["model"] = args.out
    report["sphere_fallback_clusters"] = list(fallbacks)
    print(json.dumps(report))
    return EXIT_OK


def cmd_predict(args):
    state, lik, _, _ = load_model(args.model)
    inputs = load_inputs(args.data)
    if inputs.shape[1] != state.kernel.dim:
        raise DataFormatError(
            f"model expects {state.kernel.dim} input columns, "
            f"got {inputs.shape[1]}"
        )
    d = inputs.shape[1]
    with open(args.out, "w", newline="") as handle:
        if isinstance(lik, GaussianNoise):
            handle.write(",".join([f"x{i}" for i in range(d)] + ["mean", "var"]) + "\n")
            for x in inputs:
                mean = predict_mean(state, x)
                var = predict_cov(state, x, x) + lik.v_y
                handle.write(
                    ",".join([fmt(v) for v in x] + [fmt(mean), fmt(var)]) + "\n"
                )
        else:
            handle.write(",".join([f"x{i}" for i in range(d)] + ["prob"]) + "\n")
            for x in inputs:
                prob = predictive_class_probability(state, x, lik)
                handle.write(",".join([fmt(v) for v in x] + [fmt(prob)]) + "\n")
    print(json.dumps({"written": args.out, "rows": len(inputs)}))
    return EXIT_OK


def cmd_eval(args):
    state, lik, _, _ = load_model(args.model)
    if isinstance(lik, GaussianNoise):
        data = load_csv(args.data, REGRESSION)
        mu = np.array([predict_mean(state, x) for x in data.inputs])
        value = float(np.sqrt(np.mean((mu - data.targets) ** 2)))
        metric = "rmse"
    else:
        data = load_csv(args.data, CLASSIFICATION)
        mu = np.array([predict_mean(state, x) for x in data.inputs])
        labels = np.where(mu > 0, 1.0, -1.0)
        value = float(np.mean(labels != data.targets))
        metric = "error-rate"
    print(json.dumps({"metric": metric, "value": value, "n": len(data)}))
    return EXIT_OK


def cmd_grid(args):
    state, lik, _, _ = load_model(args.model)
    if state.kernel.dim != 2:
        raise InvalidConfigError("grid export needs a 2-D model")
    x0 = np.linspace(args.x0_min, args.x0_max, args.nx)
    x1 = np.linspace(args.x1_min, args.x1_max, args.ny)
    classify = isinstance(lik, LabelNoise)
    columns = ("x0", "x1", "prob") if classify else ("x0", "x1", "mean", "var")
    field = args.field
    if field is None:
        field = "prob" if classify else "mean"
    if field not in columns[2:]:
        raise InvalidConfigError(
            f"field {field!r} is not exported by this model type"
        )
    table = np.empty((args.ny, args.nx, len(columns) - 2))
    for i, b in enumerate(x1[::-1]):
        for j, a in enumerate(x0):
            point = np.array([a, b])
            if classify:
                table[i, j, 0] = predictive_class_probability(state, point, lik)
            else:
                table[i, j, 0] = predict_mean(state, point)
                table[i, j, 1] = predict_cov(state, point, point)
    with open(args.out, "w", newline="") as handle:
        handle.write(",".join(columns) + "\n")
        for i, b in enumerate(x1[::-1]):
            for j, a in enumerate(x0):
                handle.write(
                    ",".join(
                        [fmt(a), fmt(b)] + [fmt(v) for v in table[i, j]]
                    )
                    + "\n"
                )
    if args.pgm is not None:
        grid = table[:, :, columns.index(field) - 2]
        lo, hi = float(grid.min()), float(grid.max())
        if hi > lo:
            pixels = np.rint((grid - lo) / (hi - lo) * 255).astype(int)
        else:
            pixels = np.zeros_like(grid, dtype=int)
        with open(args.pgm, "w") as handle:
            handle.write(f"P2\n{args.nx} {args.ny}\n255\n")
            for row in pixels:
                handle.write(" ".join(str(v) for v in row) + "\n")
    print(json.dumps({"written": args.out, "rows": args.nx * args.ny}))
    return EXIT_OK


def cmd_benchmark(args):
    m_list = _parse_int_list(args.m)
    modes = _parse_mode_list(args.modes)
    task = _TASKS[args.task] if args.task is not None else None
    rows = benchmark(
        dataset=args.dataset,
        m_list=m_list,
        modes=modes,
        repeats=args.repeats,
        base_seed=args.base_seed,
        task=task,
        sigma=args.sigma,
        v_y=args.vy,
        epsilon=args.eps,
        damping=args.damping,
        n=args.n,
        n_train=args.train,
        n_test=args.test,
        train_fraction=args.train_fraction,
        ridge=args.ridge,
        reference=not args.no_reference,
    )
    write_benchmark_csv(rows, args.out)
    print(json.dumps({"written": args.out, "rows": len(rows)}))
    return EXIT_OK


def cmd_oracle(args):
    if args.check == "exact-gp":
        train = load_csv(args.data, REGRESSION)
        kernel = RbfKernel(sigma=args.sigma, dim=train.dim)
        queries = (
            load_inputs(args.query) if args.query is not None else train.inputs
        )
        d = queries.shape[1]
        with open(args.out, "w", newline="") as handle:
            handle.write(
                ",".join([f"x{i}" for i in range(d)] + ["mean", "var"]) + "\n"
            )
            for x in queries:
                mean, var = exact_gp_regression(
                    kernel, train.inputs, train.targets, args.vy, x
                )
                handle.write(
                    ",".join([fmt(v) for v in x] + [fmt(mean), fmt(var + args.vy)])
                    + "\n"
                )
        print(json.dumps({"written": args.out, "rows": len(queries)}))
        return EXIT_OK
    rng = np.random.default_rng(args.seed)
    dims = [1, 2] if args.dim == 0 else [args.dim]
    worst = 0.0
    for _ in range(args.cases):
        d = int(rng.choice(dims))
        sigma = float(rng.uniform(0.5, 2.0))
        kernel = RbfKernel(sigma=sigma, dim=d)
        center = rng.uniform(-1.0, 1.0, d)
        rot, _ = np.linalg.qr(rng.standard_normal((d, d)))
        cov = rot @ np.diag(rng.uniform(0.0, 2.0, d)) @ rot.T
        cov = 0.5 * (cov + cov.T)
        basis = BlurredBasis(center=center, cov=cov)
        offset = rng.uniform(-1.0, 1.0, d)
        x = center + 3.0 * sigma * offset / max(1.0, float(np.linalg.norm(offset)))
        rule = QuadratureRule(kind="adaptive-1d" if d == 1 else "tensor-2d")
        reference = quad_blurred_cross(kernel, x, basis, rule)
        worst = max(worst, abs(blurred_cross(kernel, x, basis) - reference))
    print(json.dumps({"cases": args.cases, "max_abs_error": worst}))
    if worst > args.tol:
        raise NumericalDomainError(
            f"closed form deviates from quadrature by {worst} > {args.tol}"
        )
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="blurgp",
        description=(
            "Sparse Gaussian process regression and classification on a "
            "small set of blurred basis points, trained by expectation "
            "propagation."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate synthetic datasets")
    gen = synth.add_subparsers(dest="generator", required=True)
    circle = gen.add_parser("circle", help="quadrant regression on a circle")
    circle.add_argument("--n", type=int, default=100, help="points (default 100)")
    circle.add_argument("--noise-xy", type=float, default=0.05,
                        help="input jitter sd (default 0.05)")
    circle.add_argument("--noise-y", type=float, default=0.1,
                        help="target noise sd (default 0.1)")
    circle.add_argument("--seed", type=int, default=0, help="generator seed")
    circle.add_argument("--out", default="circle.csv", help="output CSV path")
    circle.set_defaults(func=cmd_synth)
    classes = gen.add_parser("classes", help="two nested Gaussian classes")
    classes.add_argument("--train", type=int, default=200,
                         help="training points (default 200)")
    classes.add_argument("--test", type=int, default=2000,
                         help="test points (default 2000)")
    classes.add_argument("--seed", type=int, default=0, help="generator seed")
    classes.add_argument("--out-train", default="classes-train.csv",
                         help="training CSV path")
    classes.add_argument("--out-test", default="classes-test.csv",
                         help="test CSV path")
    classes.set_defaults(func=cmd_synth)

    fit = sub.add_parser("fit", help="cluster, build a basis, run EP")
    fit.add_argument("--task", choices=("reg", "class"), required=True)
    fit.add_argument("--data", required=True, help="training CSV")
    fit.add_argument("--m", type=int, default=None,
                     help="basis points (default: 4 reg, 3 class)")
    fit.add_argument("--cov", choices=MODES, default="full",
                     help="covariance mode (default full)")
    fit.add_argument("--sigma", type=float, default=None,
                     help="kernel width (default: 0.1 reg, 0.7 class)")
    fit.add_argument("--vy", type=float, default=CIRCLE_DEFAULTS["v_y"],
                     help="observation noise variance (reg, default 1.0)")
    fit.add_argument("--eps", type=float, default=0.0,
                     help="label flip rate (class, default 0)")
    fit.add_argument("--ridge", type=float, default=1e-6,
                     help="relative diagonal ridge on full covariances")
    fit.add_argument("--tol", type=float, default=1e-6,
                     help="EP stopping threshold")
    fit.add_argument("--max-sweeps", type=int, default=100)
    fit.add_argument("--damping", type=float, default=None,
                     help="site damping (default: 1.0 reg, 0.5 class)")
    fit.add_argument("--shuffle", action="store_true",
                     help="visit points in seeded random order each sweep")
    fit.add_argument("--min-cavity-var", type=float, default=1e-10)
    fit.add_argument("--seed", type=int, default=0,
                     help="clustering and sweep-order seed")
    fit.add_argument("--out", default="model.json", help="model file path")
    fit.set_defaults(func=cmd_fit)

    predict = sub.add_parser("predict", help="write per-row predictions")
    predict.add_argument("--model", required=True)
    predict.add_argument("--data", required=True,
                         help="CSV of inputs (a y column is ignored)")
    predict.add_argument("--out", default="predictions.csv")
    predict.set_defaults(func=cmd_predict)

    evaluate = sub.add_parser("eval", help="score a model on labeled data")
    evaluate.add_argument("--model", required=True)
    evaluate.add_argument("--data", required=True)
    evaluate.set_defaults(func=cmd_eval)

    grid = sub.add_parser(
        "grid",
        help="evaluate on a 2-D lattice (rows: x1 from max down, x0 ascending)",
    )
    grid.add_argument("--model", required=True)
    grid.add_argument("--x0-min", type=float, default=-2.0)
    grid.add_argument("--x0-max", type=float, default=2.0)
    grid.add_argument("--x1-min", type=float, default=-2.0)
    grid.add_argument("--x1-max", type=float, default=2.0)
    grid.add_argument("--nx", type=int, default=64)
    grid.add_argument("--ny", type=int, default=64)
    grid.add_argument("--out", default="grid.csv")
    grid.add_argument("--pgm", default=None,
                      help="also write a P2 grayscale image here")
    grid.add_argument("--field", choices=("mean", "var", "prob"), default=None,
                      help="image field (default: mean, or prob for class)")
    grid.set_defaults(func=cmd_grid)

    bench = sub.add_parser("benchmark", help="comparative table over M and modes")
    bench.add_argument("--dataset", required=True,
                       help="synth-circle, synth-classes, or a CSV path")
    bench.add_argument("--task", choices=("reg", "class"), default=None,
                       help="required for CSV datasets")
    bench.add_argument("--m", default="3,4,5", help="comma-separated basis sizes")
    bench.add_argument("--modes", default="full,sphere,zero")
    bench.add_argument("--repeats", type=int, default=10)
    bench.add_argument("--base-seed", type=int, default=0)
    bench.add_argument("--sigma", type=float, default=None,
                       help="kernel width (default per dataset)")
    bench.add_argument("--vy", type=float, default=None)
    bench.add_argument("--eps", type=float, default=0.0)
    bench.add_argument("--damping", type=float, default=None)
    bench.add_argument("--n", type=int, default=100,
                       help="synth-circle training size")
    bench.add_argument("--train", type=int, default=200,
                       help="synth-classes training size")
    bench.add_argument("--test", type=int, default=2000,
                       help="synth-classes test size")
    bench.add_argument("--train-fraction", type=float, default=0.5,
                       help="train share for CSV datasets")
    bench.add_argument("--ridge", type=float, default=1e-6)
    bench.add_argument("--no-reference", action="store_true",
                       help="skip the dense-model reference rows")
    bench.add_argument("--out", default="results.csv")
    bench.set_defaults(func=cmd_benchmark)

    oracle = sub.add_parser("oracle", help="reference computations for checks")
    checks = oracle.add_subparsers(dest="check", required=True)
    exact = checks.add_parser("exact-gp", help="dense GP regression predictions")
    exact.add_argument("--data", required=True, help="training CSV")
    exact.add_argument("--query", default=None,
                       help="inputs to predict at (default: training inputs)")
    exact.add_argument("--sigma", type=float, default=0.5)
    exact.add_argument("--vy", type=float, default=0.1)
    exact.add_argument("--out", default="oracle.csv")
    exact.set_defaults(func=cmd_oracle)
    quadr = checks.add_parser("quadrature",
                              help="kernel integrals vs numerical quadrature")
    quadr.add_argument("--cases", type=int, default=200)
    quadr.add_argument("--dim", type=int, choices=(0, 1, 2), default=0,
                       help="input dimension, 0 means mixed 1 and 2")
    quadr.add_argument("--seed", type=int, default=0)
    quadr.add_argument("--tol", type=float, default=1e-6)
    quadr.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (IllConditionedBasisError, NumericalDomainError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BlurGpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
