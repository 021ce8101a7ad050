"""Batch command line: one subcommand per operation, CSV or JSON on stdout/--out.

Exit codes: 0 success, 1 check failed, 2 usage or domain error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import dirichlet, identities, smooth
from .variance import (
    FullGrid,
    LiouvilleSource,
    RandomSample,
    Strided,
    VarianceReport,
    h_scan,
    predicted_bound,
    variance,
)
from .errors import (
    ConfigurationError,
    DegenerateInputError,
    DomainError,
    HScanError,
    RangeNotMaterializedError,
    StorageError,
    UndersampledError,
)
from .sieve import sieve_lambda
from .storage import SegmentCache, default_cache_dir, write_segment

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class CheckFailed(Exception):
    pass


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return float(f"{v:.12g}") if math.isfinite(v) else None
    return value


class Emitter:
    def __init__(self, args):
        self.args = args

    def __call__(self, columns, rows, summary=None):
        if self.args.format == "json":
            doc = {
                "command": self.args.command,
                "columns": list(columns),
                "rows": [{c: _json_value(r[c]) for c in columns} for r in rows],
            }
            if summary:
                doc["summary"] = {k: _json_value(v) for k, v in summary.items()}
            text = json.dumps(doc) + "\n"
        else:
            lines = [",".join(columns)]
            lines += [",".join(fmt(r[c]) for c in columns) for r in rows]
            text = "\n".join(lines) + "\n"
        if self.args.out in (None, "-"):
            sys.stdout.write(text)
            sys.stdout.flush()
        else:
            try:
                with open(self.args.out, "w", newline="\n") as fh:
                    fh.write(text)
            except OSError as exc:
                raise StorageError(f"cannot write {self.args.out}: {exc}") from exc
        if summary:
            print(" ".join(f"{k}={fmt(v)}" for k, v in summary.items()), file=sys.stderr)


def _int_list(text: str) -> list:
    try:
        return [int(float(v)) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int(text: str) -> int:
    # accepts 1e6 style input
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if not value.is_integer():
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return int(text) if text.lstrip("-").isdigit() else int(value)


def _positive_int(text: str) -> int:
    value = _int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _source(args):
    cache_dir = args.cache_dir or default_cache_dir()
    cache = SegmentCache(cache_dir) if cache_dir else None
    return LiouvilleSource(workers=args.threads, cache=cache)


# --- commands -------------------------------------------------------------------------------


def cmd_sieve(args, emit):
    seg = sieve_lambda(args.start, args.len, workers=args.threads)
    if args.segment_out:
        write_segment(seg, args.segment_out)
    cache_dir = args.cache_dir or default_cache_dir()
    if cache_dir:
        SegmentCache(cache_dir).store(seg)
    prefix = seg.prefix_sums()
    rows = [
        {"n": seg.start + i, "lambda": int(s), "L": int(L)}
        for i, (s, L) in enumerate(zip(seg.signs.tolist(), prefix.tolist()))
    ]
    emit(("n", "lambda", "L"), rows)


def _policy(args):
    if args.policy == "strided":
        return Strided(args.stride)
    if args.policy == "random":
        if args.count is None:
            raise ConfigurationError("--policy random needs --count")
        return RandomSample(args.count, args.seed)
    return FullGrid()


def cmd_variance(args, emit):
    rep = variance(args.X, args.h, _policy(args), _source(args), workers=args.threads)
    emit(VarianceReport.CSV_COLUMNS, [rep.row()], {"policy": rep.sample_policy.describe()})


def cmd_scan_h(args, emit):
    try:
        reps = h_scan(args.X, args.h, _policy(args), _source(args), workers=args.threads)
    except HScanError as exc:
        if exc.partial:
            emit(VarianceReport.CSV_COLUMNS, [r.row() for r in exc.partial], {"partial": True})
        raise exc.cause if exc.cause is not None else exc
    emit(VarianceReport.CSV_COLUMNS, [r.row() for r in reps])


def _poly(args):
    lo, hi = args.n_start, args.n_end
    if hi < lo or lo < 1:
        raise DomainError("need 1 <= n-start <= n-end")
    if args.coeffs == "liouville":
        return dirichlet.DirichletPolynomial.liouville(lo, hi, _source(args))
    if args.coeffs == "primes":
        return dirichlet.DirichletPolynomial.prime_indicator(lo, hi)
    if args.coeffs == "ones":
        return dirichlet.DirichletPolynomial(lo, np.ones(hi - lo + 1))
    if args.seed is None:
        raise ConfigurationError("random coefficients need --seed")
    rng = np.random.default_rng(args.seed)
    return dirichlet.DirichletPolynomial(lo, rng.choice([-1.0, 1.0], size=hi - lo + 1))


def cmd_meansq(args, emit):
    rep = dirichlet.mean_square(_poly(args), args.sigma, args.T1, args.T2, args.step, workers=args.threads)
    emit(dirichlet.MeanSquareReport.CSV_COLUMNS, [rep.row()])


def cmd_mvt_check(args, emit):
    args.n_start, args.n_end = 1, args.N
    poly = _poly(args)
    r = dirichlet.mvt_check(poly, args.T, step=args.step, workers=args.threads)
    env = dirichlet.mvt_envelope(args.N, args.T)
    ok = abs(r - 1) <= env
    emit(("N", "T", "r", "abs_dev", "envelope", "ok"), [{"N": args.N, "T": args.T, "r": r, "abs_dev": abs(r - 1), "envelope": env, "ok": ok}])
    if not ok:
        raise CheckFailed(f"|r-1|={abs(r - 1):.6g} exceeds {env:.6g}")


def cmd_primesum_scan(args, emit):
    rep = dirichlet.prime_sum_scan(args.P, args.X, upper=args.upper, points=args.points)
    emit(dirichlet.PrimeSumReport.CSV_COLUMNS, rep.rows(), {"max_ratio": rep.max_ratio, "primes": rep.num_primes, "empty": rep.empty})


def cmd_lambda_scan(args, emit):
    rep = dirichlet.lambda_poly_scan(args.X, args.t, ladder=args.ladder)
    rows = [{"X": rep.X, "max_abs": rep.max_abs, "argmax_t": rep.argmax_t}]
    rows += [{"X": x, "max_abs": m, "argmax_t": math.nan} for x, m in rep.ladder]
    emit(dirichlet.LambdaScanReport.CSV_COLUMNS, rows, {"slope": rep.slope} if args.ladder else None)


def cmd_plancherel(args, emit):
    rep = dirichlet.plancherel_compare(args.X, args.h, args.T_cap, step=args.step, workers=args.threads)
    emit(dirichlet.PlancherelReport.CSV_COLUMNS, [rep.row()])
    if not rep.lhs <= args.envelope * (rep.rhs_low + rep.rhs_high):
        raise CheckFailed(f"lhs exceeds {args.envelope} * (rhs_low + rhs_high)")


def cmd_perron_check(args, emit):
    rec = dirichlet.perron_truncated(args.y, args.kappa, args.T, args.step)
    emit(dirichlet.PerronRecord.CSV_COLUMNS, [rec.row()])
    if rec.error > args.envelope * rec.bound:
        raise CheckFailed(f"error {rec.error:.6g} exceeds {args.envelope} * bound")


def cmd_decompose_check(args, emit):
    rep = identities.rough_identity_check(args.X, args.h, misprint=args.misprint)
    lines = "".join(f.to_json() + "\n" for f in rep.failures)
    if args.failures_out:
        try:
            Path(args.failures_out).write_text(lines)
        except OSError as exc:
            raise StorageError(f"cannot write {args.failures_out}: {exc}") from exc
    elif lines:
        sys.stderr.write(lines)
    emit(identities.IdentityReport.CSV_COLUMNS, [rep.row()], {"checked": rep.checked, "failures": len(rep.failures)})
    if rep.failures:
        raise CheckFailed(f"{len(rep.failures)} identity failures")


def cmd_rearrange_check(args, emit):
    rep = identities.rearrangement_check(args.X, args.h)
    emit(identities.RearrangementReport.CSV_COLUMNS, [rep.row()])
    if not rep.equal:
        raise CheckFailed("coefficient maps differ")


def cmd_split_check(args, emit):
    rep = identities.smooth_rough_split_check(args.X, args.h)
    emit(identities.SplitReport.CSV_COLUMNS, [rep.row()])
    if not rep.ok:
        raise CheckFailed("smooth/rough partition failed")


def cmd_psi(args, emit):
    if args.y >= 2:
        row = smooth.psi_estimate(args.x, args.y, method=args.method, workers=args.threads).row()
    else:
        row = dict.fromkeys(smooth.SmoothCountRecord.CSV_COLUMNS, math.nan)
        row.update(x=args.x, y=args.y, u=math.inf, psi_exact=smooth.psi_exact(args.x, args.y, args.method))
    emit(smooth.SmoothCountRecord.CSV_COLUMNS, [row])


def cmd_rho(args, emit):
    emit(("u", "rho"), [{"u": u, "rho": smooth.dickman_rho(u)} for u in args.u])


def cmd_threshold(args, emit):
    emit(("X", "c", "H"), [{"X": args.X, "c": args.c, "H": smooth.threshold_H(args.X, args.c)}])


def cmd_density_check(args, emit):
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = smooth.smooth_density_check(args.X, args.h, c=args.c, workers=args.threads)
    emit(smooth.DensityReport.CSV_COLUMNS, [rep.row()])
    if rep.density > args.envelope:
        raise CheckFailed(f"density {rep.density:.6g} exceeds {args.envelope}")


def cmd_corollary_bound(args, emit):
    value = predicted_bound(args.X, args.h, args.C, args.c)
    emit(("X", "h", "C", "c", "H", "bound"), [{"X": args.X, "h": args.h, "C": args.C, "c": args.c, "H": smooth.threshold_H(args.X, args.c), "bound": value}])


# --- parser -----------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--threads", type=_positive_int, default=1)
    common.add_argument("--cache-dir", default=None, help="segment cache directory (default $LIOU_CACHE)")
    common.add_argument("--seed", type=_int, default=None)

    parser = argparse.ArgumentParser(prog="liouvar", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, fn, help):
        p = sub.add_parser(name, parents=[common], help=help)
        p.set_defaults(func=fn)
        return p

    p = add("sieve", cmd_sieve, "Liouville values and prefix sums on a range")
    p.add_argument("--start", type=_positive_int, required=True)
    p.add_argument("--len", type=_positive_int, required=True)
    p.add_argument("--segment-out", default=None, help="also write a .liou file")

    for name, fn, hname in (("variance", cmd_variance, "--h"), ("scan-h", cmd_scan_h, "--h")):
        p = add(name, fn, "short-interval variance" if name == "variance" else "variance for several h")
        p.add_argument("--X", type=_positive_int, required=True)
        if name == "variance":
            p.add_argument("--h", type=_int, required=True)
        else:
            p.add_argument("--h", type=_int_list, required=True, help="comma-separated ascending list")
        p.add_argument("--policy", choices=("full", "strided", "random"), default="full")
        p.add_argument("--stride", type=_positive_int, default=1)
        p.add_argument("--count", type=_positive_int, default=None)

    def poly_args(p, with_range=True):
        if with_range:
            p.add_argument("--n-start", type=_positive_int, required=True)
            p.add_argument("--n-end", type=_positive_int, required=True)
        p.add_argument("--coeffs", choices=("liouville", "primes", "ones", "random"), default="liouville")
        p.add_argument("--step", type=float, default=None)

    p = add("meansq", cmd_meansq, "mean square of a Dirichlet polynomial")
    poly_args(p)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--T1", type=float, required=True)
    p.add_argument("--T2", type=float, required=True)

    p = add("mvt-check", cmd_mvt_check, "mean-value ratio against the diagonal")
    poly_args(p, with_range=False)
    p.set_defaults(coeffs="random")
    p.add_argument("--N", type=_positive_int, required=True)
    p.add_argument("--T", type=float, required=True)

    p = add("primesum-scan", cmd_primesum_scan, "prime sums on a geometric t grid")
    p.add_argument("--P", type=_positive_int, required=True)
    p.add_argument("--X", type=_positive_int, required=True)
    p.add_argument("--upper", type=_positive_int, default=None)
    p.add_argument("--points", type=_positive_int, default=64)

    p = add("lambda-scan", cmd_lambda_scan, "pointwise scan of the lambda polynomial on [X, 2X]")
    p.add_argument("--X", type=_positive_int, required=True)
    p.add_argument("--t", type=_float_list, default=[0.0])
    p.add_argument("--ladder", type=_int_list, default=None)

    p = add("plancherel", cmd_plancherel, "compare both sides of the Plancherel reduction")
    p.add_argument("--X", type=_positive_int, required=True)
    p.add_argument("--h", type=_int, required=True)
    p.add_argument("--T-cap", type=float, default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--envelope", type=float, default=100.0)

    p = add("perron-check", cmd_perron_check, "truncated Perron integral vs indicator")
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--envelope", type=float, default=10.0)

    for name, fn in (("decompose-check", cmd_decompose_check), ("rearrange-check", cmd_rearrange_check), ("split-check", cmd_split_check)):
        p = add(name, fn, "exact identity check on [X, 4X]")
        p.add_argument("--X", type=_positive_int, required=True)
        p.add_argument("--h", type=_positive_int, required=True)
        if name == "decompose-check":
            p.add_argument("--misprint", action="store_true", help="use the constant-1 denominator")
            p.add_argument("--failures-out", default=None, help="JSON-lines failure log")

    p = add("psi", cmd_psi, "exact smooth-number count with estimates")
    p.add_argument("--x", type=_positive_int, required=True)
    p.add_argument("--y", type=_positive_int, required=True)
    p.add_argument("--method", choices=("auto", "sieve", "dfs"), default="auto")

    p = add("rho", cmd_rho, "Dickman rho")
    p.add_argument("--u", type=_float_list, required=True)

    p = add("threshold", cmd_threshold, "H_c(X)")
    p.add_argument("--X", type=float, required=True)
    p.add_argument("--c", type=float, default=0.5)

    p = add("density-check", cmd_density_check, "Psi(4X, h) * h / (4X)")
    p.add_argument("--X", type=_positive_int, required=True)
    p.add_argument("--h", type=_positive_int, required=True)
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--envelope", type=float, default=10.0)

    p = add("corollary-bound", cmd_corollary_bound, "predicted variance bound per unit X")
    p.add_argument("--X", type=float, required=True)
    p.add_argument("--h", type=_positive_int, required=True)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--c", type=float, default=0.5)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    emit = Emitter(args)
    try:
        args.func(args, emit)
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (StorageError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DomainError, ConfigurationError, UndersampledError, DegenerateInputError, RangeNotMaterializedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
