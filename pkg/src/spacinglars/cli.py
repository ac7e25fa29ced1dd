"""Command-line front end.

Exit codes: 0 success, 2 usage or input errors, 3 numerical degeneracy.
JSON goes to stdout, warnings to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from .knots import NearUnitCorrelation
from .model import (CSVFormatError, DegenerateColumn, NotPSD, correlate, gram, normalize_design,
                    read_matrix, read_vector, validate_assumptions)
from .power import power_2d, spacing_power
from .qmc import DEFAULT_POINTS, DEFAULT_SHIFTS, IntegratorConfig
from .simlab import (FIGURES, Scenario, compare_tests, pvalue_study, reproduce_figure,
                     write_rows)
from .spacing import spacing_pvalue
from .tspacing import DegenerateNoise, t_spacing_pvalue

EXIT_USAGE = 2
EXIT_DEGENERATE = 3


class UsageError(Exception):
    pass


def _alpha(text):
    try:
        a = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid alpha {text!r}") from None
    if not 0.0 < a < 1.0:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 1)")
    return a


def _dump(obj):
    print(json.dumps(obj, sort_keys=True))


def _load_xy(args):
    X = read_matrix(args.X)
    Y = read_vector(args.Y)
    if X.shape[0] != Y.size:
        raise UsageError(f"{args.Y}: length {Y.size} does not match the {X.shape[0]} rows of {args.X}")
    if X.shape[1] < 2:
        raise UsageError(f"{args.X}: need at least two columns")
    return X, Y


def cmd_test(args):
    X, Y = _load_xy(args)
    Sigma = None
    if args.sigma:
        Sigma = read_matrix(args.sigma)
        if Sigma.shape != (X.shape[0],) * 2:
            raise UsageError(f"{args.sigma}: expected a {X.shape[0]}x{X.shape[0]} matrix")
    Xn = normalize_design(X, Sigma, warn=True)
    R = gram(Xn, Sigma)
    res = spacing_pvalue(correlate(Xn, Y), R)
    out = res.as_dict()
    out["reject"] = res.p_value <= args.alpha
    _dump(out)


def cmd_ttest(args):
    X, Y = _load_xy(args)
    if X.shape[0] < 2:
        raise UsageError("need n >= 2 observations (Student degrees of freedom n - 1)")
    Xn = normalize_design(X, warn=True)
    res = t_spacing_pvalue(Xn, Y)
    out = res.as_dict()
    out["reject"] = res.p_value <= args.alpha
    _dump(out)


def cmd_power(args):
    if args.mu is not None:
        if args.beta is not None:
            raise UsageError("give either --mu or --beta/--X, not both")
        mu = read_vector(args.mu)
        if args.R is None:
            raise UsageError("--mu requires --R")
        R = read_matrix(args.R)
    else:
        if args.beta is None or args.X is None:
            raise UsageError("give --mu with --R, or --beta with --X")
        X = normalize_design(read_matrix(args.X), warn=True)
        beta = read_vector(args.beta)
        if beta.size != X.shape[1]:
            raise UsageError(f"{args.beta}: length {beta.size}, expected {X.shape[1]}")
        mu = X.T @ (X @ beta)
        R = read_matrix(args.R) if args.R is not None else gram(X)
    if R.shape != (mu.size, mu.size):
        raise UsageError(f"R has shape {R.shape}, expected {(mu.size, mu.size)}")
    if np.max(np.abs(R - R.T)) > 1e-8:
        raise UsageError("R is not symmetric")
    for flag in validate_assumptions(R):
        if isinstance(flag, NotPSD):
            raise UsageError(f"R is not positive semidefinite (min eigenvalue {flag.min_eigenvalue:g})")
        warnings.warn(f"assumption check: {flag}")
    try:
        cfg = IntegratorConfig(args.N, args.M, args.seed, args.mc)
    except ValueError as e:
        raise UsageError(str(e)) from None
    _dump(spacing_power(mu, R, args.alpha, cfg).as_dict())


def cmd_power2d(args):
    b1, b2 = args.beta
    try:
        est = power_2d(np.array([b1, b2]), args.rho, args.alpha)
    except ValueError as e:
        raise UsageError(str(e)) from None
    _dump(est.as_dict())


def cmd_simulate(args):
    try:
        sc = Scenario.from_json(args.scenario)
    except (OSError, TypeError, ValueError) as e:
        raise UsageError(f"{args.scenario}: {e}") from None
    res = compare_tests(sc) if args.study == "compare" else pvalue_study(sc, args.which)
    if args.out:
        res.write_csv(args.out)
    else:
        write_rows(sys.stdout, res.columns, res.records)
    print(json.dumps({"summary": res.summary}, sort_keys=True), file=sys.stderr)


def cmd_figure(args):
    try:
        paths = reproduce_figure(args.id, args.out, args.scale, args.seed, args.alpha)
    except OSError as e:
        raise UsageError(f"cannot write to {args.out}: {e}") from None
    _dump({"figure": args.id, "files": [str(p) for p in paths]})


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spacinglars", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="spacing test with known noise covariance")
    p.add_argument("X")
    p.add_argument("Y")
    p.add_argument("--sigma", metavar="SIGMA.csv", help="noise covariance (default identity)")
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("ttest", help="t-spacing test, noise scale unknown")
    p.add_argument("X")
    p.add_argument("Y")
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.set_defaults(func=cmd_ttest)

    p = sub.add_parser("power", help="power of the spacing test by randomized QMC")
    p.add_argument("--mu", metavar="MU.csv")
    p.add_argument("--beta", metavar="BETA.csv")
    p.add_argument("--X", metavar="X.csv")
    p.add_argument("--R", metavar="R.csv")
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.add_argument("--N", type=int, default=DEFAULT_POINTS, help="lattice points per shift")
    p.add_argument("--M", type=int, default=DEFAULT_SHIFTS, help="random shifts")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mc", action="store_true", help="plain Monte Carlo instead of lattice points")
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("power2d", help="exact two-predictor power by quadrature")
    p.add_argument("--beta", type=float, nargs=2, required=True, metavar=("B1", "B2"))
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.set_defaults(func=cmd_power2d)

    p = sub.add_parser("simulate", help="run a simulation study from a scenario JSON file")
    p.add_argument("scenario")
    p.add_argument("--study", choices=("compare", "pvalues"), default="compare")
    p.add_argument("--which", choices=("S", "T", "both"), default="both")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("figure", help="write plot-ready CSV data for one of the reference figures")
    p.add_argument("id", choices=FIGURES)
    p.add_argument("--out", default=".")
    p.add_argument("--scale", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=2015)
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.set_defaults(func=cmd_figure)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            args.func(args)
            code = 0
        except (CSVFormatError, UsageError) as e:
            print(f"error: {e}", file=sys.stderr)
            code = EXIT_USAGE
        except (DegenerateColumn, DegenerateNoise, NearUnitCorrelation) as e:
            print(f"error: degenerate input: {e}", file=sys.stderr)
            code = EXIT_DEGENERATE
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            code = EXIT_USAGE
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
