"""Command-line entry point.

    weakspacing cdf       spacing CDF and density tables (s, cdf, density)
    weakspacing painleve  log D from the integrable system, with cross-checks
    weakspacing sample    Monte-Carlo real-part spacings and a KS summary
    weakspacing validate  the acceptance suite; exit 0 iff every check passes

Exit codes: 0 success or all checks pass, 1 failure, 2 usage error.
"""
import argparse
import json
import math
import sys

import numpy as np

from . import rmt
from .errors import ConvergenceError, IllConditionedError
from .fredholm import log_det_with_t_derivs, spacing_curve
from .painleve import evolve, reconstruct_log_d, residual_r38
from .validate import DEFAULT_TOLERANCES, run_all


class UsageError(Exception):
    pass


def _fmt(v):
    return format(float(v), ".17g")


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _table(columns, rows, fmt):
    if fmt == "json":
        records = [{c: float(v) for c, v in zip(columns, row)} for row in rows]
        return json.dumps(records, sort_keys=True, indent=1) + "\n"
    lines = [",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\r\n".join(lines) + "\r\n"


def _s_grid(s_max, ds):
    if not (s_max > 0 and ds > 0):
        raise UsageError("--smax and --ds must be positive")
    return np.arange(0.0, s_max + 0.5 * ds, ds)


def cmd_cdf(args):
    s = _s_grid(args.smax, args.ds)
    if args.poisson:
        sigma = math.inf
    else:
        if args.sigma is None or args.sigma < 0:
            raise UsageError("cdf needs --sigma >= 0 or --poisson")
        sigma = args.sigma
    curve = spacing_curve(sigma, s, args.m)
    _write_text(args.out, _table(["s", "cdf", "density"],
                                 zip(curve.s_grid, curve.cdf, curve.density), args.format))
    return 0


def _painleve_sigma_rows(args):
    # G_sigma(t) = D(t, alpha = t / sigma): one evolve per t
    ts = np.arange(args.ds, args.tmax + 0.5 * args.ds, args.ds)
    rows = []
    for t in ts:
        traj = evolve(float(t) / args.sigma, float(t), n_steps=args.steps)
        rows.append((t, traj.log_d[-1], log_det_with_t_derivs(args.sigma, float(t), args.m).log_g))
    return ["t", "logD_evolve", "logG_nystrom"], rows


def cmd_painleve(args):
    if args.sigma is not None:
        if args.sigma <= 0:
            raise UsageError("--sigma must be positive for the painleve bridge")
        columns, rows = _painleve_sigma_rows(args)
        _write_text(args.out, _table(columns, rows, args.format))
        return 0
    if args.point_mass:
        grid = "point_mass"
    elif args.alpha is not None and args.alpha > 0:
        grid = args.alpha
    else:
        raise UsageError("painleve needs --alpha > 0, --point-mass or --sigma")
    traj = evolve(grid, args.tmax, n_steps=args.steps)
    rec = reconstruct_log_d(traj)
    node = int(np.argmin(np.abs(traj.grid.z_nodes - 1.0)))
    t_hi = min(1.5, float(traj.t[-3]))
    res = residual_r38(traj, node, (min(0.1, t_hi), t_hi)) if traj.t.size > 8 else math.nan
    stride = max(1, int(round(args.ds / (traj.t[1] - traj.t[0])))) if traj.t.size > 1 else 1
    idx = np.unique(np.append(np.arange(0, traj.t.size, stride), traj.t.size - 1))
    rows = [(traj.t[k], traj.log_d[k], rec[k], res) for k in idx]
    _write_text(args.out, _table(["t", "logD_evolve", "logD_integral", "residual"], rows, args.format))
    return 0


def cmd_sample(args):
    if (args.sigma is None) == (args.tau is None):
        raise UsageError("sample needs exactly one of --sigma and --tau")
    exp = rmt.SpacingExperiment(n=args.n, reps=args.reps, seed=args.seed, sigma=args.sigma,
                                tau=args.tau, lambda0=args.lambda0, window=args.window,
                                method=args.method)
    res, spectra = exp.run()
    laws = {"poisson": rmt.poisson_law, "gaudin_mehta": rmt.tabulated_law(0.0, m=args.m)}
    if args.sigma is not None:
        laws["weak"] = rmt.tabulated_law(args.sigma, m=args.m)
    ks = rmt.ks_summary(res.spacings, laws) if res.spacings.size >= rmt.MIN_KS_SAMPLES else {}
    summary = {
        "params": res.params,
        "spacings": int(res.spacings.size),
        "skipped": res.skipped,
        "skip_fraction": res.skip_fraction,
        "mean_spacing": float(res.spacings.mean()) if res.spacings.size else None,
    }
    summary.update({f"ks_vs_{k}": v for k, v in ks.items()})
    if args.out:
        rmt.write_spacings_csv(args.out, res.spacings)
    if args.spectra:
        rmt.write_spectrum_csv(args.spectra, spectra)
    text = json.dumps(summary, sort_keys=True, indent=1) + "\n"
    _write_text(args.summary, text)
    return 0


def _parse_tolerances(items):
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep or key not in DEFAULT_TOLERANCES:
            raise UsageError(f"bad --tol {item!r}; keys: {', '.join(sorted(DEFAULT_TOLERANCES))}")
        try:
            out[key] = float(val)
        except ValueError as exc:
            raise UsageError(f"bad --tol value in {item!r}") from exc
    return out


def cmd_validate(args):
    tolerances = _parse_tolerances(args.tol)
    results = run_all(fast=args.fast, tolerances=tolerances, echo=print)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failed: {failed}" if failed else ""))
    return 1 if failed else 0


def build_parser():
    parser = argparse.ArgumentParser(prog="weakspacing", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--m", type=int, default=80, help="Nystrom order")

    p = sub.add_parser("cdf", help="spacing CDF and density table")
    common(p)
    p.add_argument("--sigma", type=float)
    p.add_argument("--poisson", action="store_true", help="the sigma = inf law 1 - e^-s")
    p.add_argument("--smax", type=float, default=4.0)
    p.add_argument("--ds", type=float, default=0.05)
    p.set_defaults(func=cmd_cdf)

    p = sub.add_parser("painleve", help="log D along the integrable flow")
    common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--point-mass", action="store_true")
    p.add_argument("--sigma", type=float, help="tabulate G_sigma(t) through alpha = t / sigma")
    p.add_argument("--tmax", type=float, default=1.0)
    p.add_argument("--steps", type=int, help="RK4 steps (default: automatic)")
    p.add_argument("--ds", type=float, default=0.05, help="output spacing in t")
    p.set_defaults(func=cmd_painleve)

    p = sub.add_parser("sample", help="Monte-Carlo real-part spacings")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--sigma", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--lambda0", type=float, default=0.0)
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--window", type=float, default=0.1)
    p.add_argument("--method", choices=("window", "nearest"), default="window")
    p.add_argument("--m", type=int, default=80)
    p.add_argument("--out", help="spacings CSV path")
    p.add_argument("--spectra", help="spectra CSV path (columns re, im)")
    p.add_argument("--summary", help="summary JSON path (default stdout)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("validate", help="run the acceptance suite")
    p.add_argument("--fast", action="store_true", help="skip the Monte-Carlo criteria")
    p.add_argument("--tol", action="append", metavar="KEY=VALUE", help="override a tolerance")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"weakspacing {args.command}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ConvergenceError, IllConditionedError) as exc:
        print(f"weakspacing {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
