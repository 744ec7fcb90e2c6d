"""Command line interface.

Exit codes: 0 success, 2 usage or malformed input, 3 numerical failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .errors import ConvergenceError, InvalidInputError, NotPositiveDefiniteError, ParseError
from .estimators import ESTIMATORS, fit
from .experiment import ExperimentConfig, read_config, run_figure1, run_rate_study
from .linalg import cholesky, identity, read_matrix, read_vector, write_matrix
from .model import GaussianMixture, make_adv_instance, read_dataset, sample, write_dataset
from .norms import parse_ball
from .risk import LinearClassifier, adv_snr, optimal_robust_risk, risk_report

EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 2, 3, 4


def fmt(x) -> str:
    return f"{float(x):.12g}"


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _names(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _ball(text):
    try:
        return parse_ball(text)
    except ParseError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_adversary(p):
    p.add_argument("--ball", type=_ball, default=parse_ball("linf"), help="linf, l2, l1 or lp:<p> (default linf)")
    p.add_argument("--eps", type=float, default=0.0, help="adversary budget (default 0: no adversary)")


def _add_model(p, mean_flag="--mu"):
    p.add_argument(mean_flag, required=True, metavar="FILE", help="mean vector file")
    p.add_argument("--sigma", metavar="FILE", help="covariance matrix file (default identity)")


def _load_sigma(path, d):
    return cholesky(read_matrix(path)) if path else identity(d)


def _load_model(args):
    mu = read_vector(args.mu)
    return GaussianMixture(mu, _load_sigma(args.sigma, mu.shape[0]))


def _add_experiment(p, default_estimators):
    p.add_argument("--config", metavar="PATH", help="key = value config file")
    p.add_argument("--seed", type=_u64, dest="master_seed", help="master seed (u64)")
    p.add_argument("--out", dest="output_dir", metavar="DIR")
    p.add_argument("--jobs", type=int)
    p.add_argument("--r", type=_floats, dest="r_set", metavar="R1,R2,...")
    p.add_argument("--n", type=_ints, dest="n_set", metavar="N1,N2,...")
    p.add_argument("--reps", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--ball", type=_ball)
    p.add_argument("--eps", type=float)
    p.add_argument("--estimators", type=_names, metavar="E1,E2")
    p.add_argument("--ridge", type=float)
    p.add_argument("--fallback-ridge", type=float, dest="fallback_ridge")
    p.add_argument("--slope-span", type=float, dest="slope_span")
    p.add_argument("--timing", action="store_true", default=None, help="record wall_ms (breaks byte-identical reruns)")
    p.set_defaults(default_estimators=default_estimators)


def _experiment_config(args):
    base = ExperimentConfig(estimators=args.default_estimators)
    cfg = read_config(args.config, base) if args.config else base
    keys = ("master_seed", "output_dir", "jobs", "r_set", "n_set", "reps", "d", "ball", "eps",
            "estimators", "ridge", "fallback_ridge", "slope_span", "timing")
    return cfg.with_overrides(**{k: getattr(args, k) for k in keys})


def cmd_figure1(args):
    res = run_figure1(_experiment_config(args))
    for inst in res.instances:
        print(f"r={fmt(inst.r)} adv_snr={fmt(inst.adv_snr)} optimal_robust_risk={fmt(inst.optimal_risk)} "
              f"baseline_plateau={fmt(inst.baseline_plateau)}")
    for name, path in res.files.items():
        print(f"wrote {name}: {path}")


def cmd_rate_study(args):
    res = run_rate_study(_experiment_config(args))
    for s in res.slopes:
        print(f"r={fmt(s['r'])} estimator={s['estimator']} slope={fmt(s['slope'])} "
              f"n=[{s['n_min']},{s['n_max']}]")
    for name, path in res.files.items():
        print(f"wrote {name}: {path}")


def cmd_advsnr(args):
    print(fmt(adv_snr(_load_model(args), args.ball, args.eps)))


def cmd_optimal_risk(args):
    print(fmt(optimal_robust_risk(_load_model(args), args.ball, args.eps)))


def cmd_risk(args):
    model = _load_model(args)
    rep = risk_report(LinearClassifier(read_vector(args.w)), model, args.ball, args.eps)
    for k, v in rep.as_dict().items():
        print(f"{k}={fmt(v)}")


def cmd_fit(args):
    data = read_dataset(args.data)
    sigma = cholesky(read_matrix(args.sigma)) if args.sigma else None
    if args.estimator == "known_sigma" and sigma is None:
        raise InvalidInputError("--estimator known_sigma requires --sigma")
    res = fit(args.estimator, data, args.ball, args.eps, sigma=sigma, ridge=args.ridge)
    if args.out:
        write_matrix(args.out, res.w[None, :])
    print(",".join(fmt(v) for v in res.w))


def cmd_make_instance(args):
    mu_prime = read_vector(args.mu_prime)
    sigma = _load_sigma(args.sigma, mu_prime.shape[0])
    model = make_adv_instance(mu_prime, sigma, args.ball, args.eps)
    if args.out:
        write_matrix(args.out, model.mu[None, :])
    print(",".join(fmt(v) for v in model.mu))


def cmd_sample(args):
    data = sample(_load_model(args), args.n, args.seed)
    write_dataset(args.out, data)
    print(f"wrote {data.n} rows to {args.out}")


def build_parser():
    parser = argparse.ArgumentParser(prog="advgauss", description="Adversarially robust Gaussian classification")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("figure1", help="simulation grid: plug-in vs mean baseline")
    _add_experiment(p, ("plugin", "mean_baseline"))
    p.set_defaults(func=cmd_figure1)

    p = sub.add_parser("rate-study", help="excess-risk rates and log-log slopes")
    _add_experiment(p, ("plugin", "known_sigma"))
    p.set_defaults(func=cmd_rate_study)

    p = sub.add_parser("advsnr", help="adversarial signal-to-noise ratio")
    _add_model(p)
    _add_adversary(p)
    p.set_defaults(func=cmd_advsnr)

    p = sub.add_parser("optimal-risk", help="minimal robust classification error")
    _add_model(p)
    _add_adversary(p)
    p.set_defaults(func=cmd_optimal_risk)

    p = sub.add_parser("risk", help="risks of the linear classifier sgn(w^T x)")
    p.add_argument("--w", required=True, metavar="FILE")
    _add_model(p)
    _add_adversary(p)
    p.set_defaults(func=cmd_risk)

    p = sub.add_parser("fit", help="fit an estimator on a dataset CSV")
    p.add_argument("--data", required=True, metavar="CSV")
    p.add_argument("--estimator", choices=ESTIMATORS, default="plugin")
    p.add_argument("--sigma", metavar="FILE", help="true covariance (known_sigma)")
    p.add_argument("--ridge", type=float, default=0.0)
    p.add_argument("--out", metavar="FILE")
    _add_adversary(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("make-instance", help="model whose robust mean shift maps back to mu'")
    _add_model(p, "--mu-prime")
    p.add_argument("--out", metavar="FILE")
    _add_adversary(p)
    p.set_defaults(func=cmd_make_instance)

    p = sub.add_parser("sample", help="draw a labeled dataset")
    _add_model(p)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=_u64, required=True)
    p.add_argument("--out", required=True, metavar="CSV")
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ConvergenceError, NotPositiveDefiniteError) as exc:
        print(f"advgauss: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ParseError, InvalidInputError) as exc:
        print(f"advgauss: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"advgauss: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
