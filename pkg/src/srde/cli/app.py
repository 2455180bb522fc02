"""``srde`` command line.

Exit codes: 0 success, 1 computational failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from ..classifier import DEFAULT_K, DEFAULT_THETA, Hyperparams, PointDensityEstimator, likelihoods, train
from ..core import DEFAULT_Q
from ..data_io import (
    FAMILIES,
    SyntheticSpec,
    generate,
    load_csv,
    load_model,
    save_coefficients,
    save_csv,
    save_model,
)
from ..errors import DataError, DomainError, ModelFormatError, SRDEError
from .bench import METHODS, run_bench, run_timing

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("srde")


class UsageError(Exception):
    pass


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _matrix(text: str) -> list:
    return [_floats(row) for row in text.split(";") if row.strip()]


def _default_seed() -> int:
    try:
        return int(os.environ.get("SRDE_SEED", "0"))
    except ValueError:
        return 0


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--k", type=int, default=DEFAULT_K, help="neighbors per class (default %(default)s)")
    p.add_argument("--q", type=int, default=DEFAULT_Q, help="series order 0..8 (default %(default)s)")
    p.add_argument("--theta", type=float, default=DEFAULT_THETA,
                   help="local frame radius in (0, 0.5) (default %(default)s)")
    p.add_argument("--seed", type=int, default=_default_seed(),
                   help="random seed (default $SRDE_SEED or 0)")
    p.add_argument("--output", "-o", type=Path, help="write machine-readable output here")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="srde", description="Super-radius density estimation")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="write a seeded synthetic CSV")
    g.add_argument("--family", choices=FAMILIES, required=True)
    g.add_argument("--m", type=int, default=2)
    g.add_argument("--n", type=int, default=1000)
    g.add_argument("--radius", type=float, default=1.0)
    g.add_argument("--center", type=_floats)
    g.add_argument("--mean", type=_floats)
    g.add_argument("--sigma", type=float, default=1.0)
    g.add_argument("--means", type=_matrix, help='component means, e.g. "0,0;5,5"')
    g.add_argument("--sigmas", type=_floats)
    g.add_argument("--weights", type=_floats)

    f = sub.add_parser("fit", parents=[common], help="train a classifier and save the model")
    f.add_argument("train_csv", type=Path)

    d = sub.add_parser("density", parents=[common], help="density estimate at a query point")
    d.add_argument("csv", type=Path)
    d.add_argument("--query", type=_floats, required=True, help="comma-separated coordinates")
    d.add_argument("--save-coefficients", type=Path)

    c = sub.add_parser("classify", parents=[common], help="predict labels for a test CSV")
    c.add_argument("train", type=Path, help="labeled training CSV or a saved model file")
    c.add_argument("test_csv", type=Path)

    b = sub.add_parser("bench", parents=[common], help="stratified cross-validation benchmark")
    b.add_argument("csv", type=Path)
    b.add_argument("--folds", type=int, default=5)
    b.add_argument("--methods", default=",".join(METHODS),
                   help="comma-separated subset of %s" % ",".join(METHODS))
    b.add_argument("--bandwidth", default="auto", help="KDE bandwidth or 'auto'")
    b.add_argument("--no-timing", action="store_true",
                   help="leave wall-clock columns empty so reports are reproducible")

    t = sub.add_parser("timing", parents=[common], help="training time versus dataset size")
    t.add_argument("--n", dest="sizes", type=int, nargs="+", default=[1000, 10000, 100000])
    t.add_argument("--m", type=int, default=4)
    t.add_argument("--repeats", type=int, default=5)
    return parser


def _hp(args) -> Hyperparams:
    return Hyperparams(args.k, args.q, args.theta)


def _write(args, text: str) -> None:
    if args.output is not None:
        args.output.write_text(text, encoding="utf-8")


def cmd_generate(args) -> int:
    spec = SyntheticSpec(args.family, args.m, args.n, args.seed, center=args.center,
                         radius=args.radius, mean=args.mean, sigma=args.sigma, means=args.means,
                         sigmas=args.sigmas, weights=args.weights)
    data, _ = generate(spec)
    if args.output is None:
        raise UsageError("generate needs --output")
    save_csv(data, args.output)
    print(f"wrote {data.n} points (m={data.m}) to {args.output}")
    return EXIT_OK


def cmd_fit(args) -> int:
    data = load_csv(args.train_csv)
    if not data.labeled:
        raise UsageError(f"{args.train_csv} has no 'label' column")
    model = train(data.points, data.labels, _hp(args))
    if args.output is None:
        raise UsageError("fit needs --output for the model file")
    save_model(model, args.output)
    sizes = ", ".join(f"{c}: {n}" for c, n in model.sizes.items())
    print(f"trained on {data.n} points, classes {{{sizes}}}; model written to {args.output}")
    return EXIT_OK


def cmd_density(args) -> int:
    data = load_csv(args.csv)
    query = np.asarray(args.query, dtype=float)
    if query.shape[0] != data.m:
        raise UsageError(f"query has dimension {query.shape[0]} but {args.csv} has dimension {data.m}")
    estimator = PointDensityEstimator(data.points, _hp(args))
    est = estimator.estimate(query)
    if est.coefficients is None:
        print("density: inf (query coincides with every data point)")
        return EXIT_OK
    r_k = estimator.kth_distance(est)
    lam = " ".join(f"{v:.10g}" for v in est.coefficients.lambdas)
    print(f"density: {est.value:.10g}")
    print(f"lambda: {lam}")
    print(f"k: {est.k}")
    print(f"kth_distance: {r_k:.10g}")
    print(f"log_likelihood: {est.log_likelihood:.10g}")
    _write(args, "density,lambda0,kth_distance,log_likelihood\n"
                 f"{est.value!r},{est.lambda0!r},{r_k!r},{est.log_likelihood!r}\n")
    if args.save_coefficients is not None:
        save_coefficients(est.coefficients, args.save_coefficients)
    return EXIT_OK


def cmd_classify(args) -> int:
    if args.train.suffix == ".csv":
        data = load_csv(args.train)
        if not data.labeled:
            raise UsageError(f"{args.train} has no 'label' column")
        model = train(data.points, data.labels, _hp(args))
    else:
        model = load_model(args.train)
    test = load_csv(args.test_csv)
    if test.m != model.m:
        raise UsageError(f"test data has dimension {test.m}, model expects {model.m}")
    preds = [likelihoods(model, v).predicted for v in test.points]
    out = ["index,predicted" + (",label" if test.labeled else "")]
    for i, p in enumerate(preds):
        out.append(f"{i},{p}" + (f",{test.labels[i]}" if test.labeled else ""))
    print("\n".join(out))
    if test.labeled:
        acc = float(np.mean(np.asarray(preds) == test.labels))
        print(f"accuracy: {acc:.6f} ({int(round(acc * test.n))}/{test.n})")
    _write(args, "\n".join(out) + "\n")
    return EXIT_OK


def cmd_bench(args) -> int:
    data = load_csv(args.csv)
    if not data.labeled:
        raise UsageError(f"{args.csv} has no 'label' column")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise UsageError(f"unknown methods {bad}; choose from {', '.join(METHODS)}")
    bandwidth = args.bandwidth if args.bandwidth == "auto" else float(args.bandwidth)
    report = run_bench(data, args.folds, methods, args.seed, _hp(args), bandwidth)
    print(report.format_table(include_timing=not args.no_timing))
    _write(args, report.to_csv(include_timing=not args.no_timing))
    return EXIT_OK


def cmd_timing(args) -> int:
    report = run_timing(args.sizes, args.m, args.seed, args.repeats, _hp(args))
    print(report.format_table())
    _write(args, report.to_csv())
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "fit": cmd_fit,
    "density": cmd_density,
    "classify": cmd_classify,
    "bench": cmd_bench,
    "timing": cmd_timing,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, DataError, DomainError, ModelFormatError, OSError, ValueError) as exc:
        print(f"srde {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SRDEError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"srde {args.command}: computation failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
