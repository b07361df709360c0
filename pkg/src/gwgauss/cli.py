"""Command-line entry point.

JSON goes to stdout (or ``--output``). Exit codes: 0 success, 1 numerical
failure, 2 malformed input.
"""

import argparse
import datetime
import json
import os
import sys

import numpy as np

from . import __version__
from .closed_form import gap_bound, ggw2_squared, ggw_map, lgw2_squared, w2_squared
from .discrete import assignment_slope_data, brute_force_gw, entropic_gw_solve
from .errors import GwGaussError, SchemaError
from .gaussian import PointCloud, fit_gaussian, make_gaussian, pca_align, sample, spectral_frame
from .io import (
    affine_map_to_dict,
    bounds_to_dict,
    plan_to_csv,
    read_cloud,
    read_gaussian,
    report_to_dict,
    write_csv,
)
from .selfcheck import run_checks

SEED_ENV = "GWGAUSS_SEED"


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SchemaError(f"expected an integer, got {raw!r}", SEED_ENV) from None


def _signs(text):
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise SchemaError("signs must be a comma separated list of 1 and -1", "--signs") from None
    if not all(v in (1.0, -1.0) for v in values):
        raise SchemaError("signs must be 1 or -1", "--signs")
    return values


def _range(text):
    parts = text.split(":")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except (ValueError, IndexError):
        raise SchemaError("expected lo:hi:steps", "--alpha2-range") from None
    if len(parts) != 3 or steps < 1 or lo < 0 or hi < lo:
        raise SchemaError("expected 0 <= lo <= hi and steps >= 1", "--alpha2-range")
    return np.linspace(lo, hi, steps)


def _emit(args, payload):
    if not args.no_meta:
        payload = dict(payload)
        payload["meta"] = {
            "command": args.command,
            "version": __version__,
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        }
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_bounds(args):
    g0, g1 = read_gaussian(args.a), read_gaussian(args.b)
    _emit(args, bounds_to_dict(gap_bound(g0, g1)))


def cmd_map(args):
    g0, g1 = read_gaussian(args.a), read_gaussian(args.b)
    signs = _signs(args.signs) if args.signs else None
    _emit(args, affine_map_to_dict(ggw_map(g0, g1, signs)))


def cmd_w2(args):
    g0, g1 = read_gaussian(args.a), read_gaussian(args.b)
    value, t = w2_squared(g0, g1)
    _emit(args, {"value": value, "map": None if t is None else affine_map_to_dict(t)})


def cmd_sweep(args):
    g1 = make_gaussian([0.0], [[args.beta1]])
    rows = []
    for a2 in _range(args.alpha2_range):
        b = gap_bound(make_gaussian([0.0, 0.0], np.diag([args.alpha1, a2])), g1)
        rows.append((a2, b.upper, b.lower, b.gap_cap))
    out = open(args.output, "w") if args.output else sys.stdout
    try:
        write_csv(out, ["alpha2", "ggw2", "lgw2", "gap_cap"], rows)
    finally:
        if out is not sys.stdout:
            out.close()


def _aligned_samples(g, k, seed):
    t, _ = pca_align(g)
    cloud = sample(g, k, seed)
    return PointCloud.uniform(t(cloud.points))


def cmd_empirical(args):
    g0, g1 = read_gaussian(args.a), read_gaussian(args.b)
    seed = _default_seed() if args.seed is None else args.seed
    # distinct streams for the two clouds; samples are expressed in principal frames
    x = _aligned_samples(g0, args.k, seed)
    y = _aligned_samples(g1, args.k, seed + 1)
    report = entropic_gw_solve(x, y, args.epsilon, max_outer=args.max_outer, max_sinkhorn=args.max_sinkhorn,
                               tol=args.tol, seed=seed, restarts=args.restarts)
    f0, f1 = fit_gaussian(x), fit_gaussian(y)
    w0, w1 = spectral_frame(g0).eigenvalues, spectral_frame(g1).eigenvalues
    e0, e1 = spectral_frame(f0).eigenvalues, spectral_frame(f1).eigenvalues
    ggw_emp = ggw2_squared(f0, f1)
    payload = report_to_dict(report)
    payload.update({
        "k": args.k,
        "seed": seed,
        "ggw2_population": ggw2_squared(g0, g1),
        "ggw2_empirical": ggw_emp,
        "lgw2_empirical": lgw2_squared(f0, f1),
        "gap_to_ggw2_empirical": report.objective - ggw_emp,
        "reference_slope": float(np.sqrt(w1[0] / w0[0])) if w0[0] > 0 else None,
        "reference_slope_empirical": float(np.sqrt(e1[0] / e0[0])) if e0[0] > 0 else None,
    })
    if args.scatter:
        with open(args.scatter, "w") as fh:
            write_csv(fh, ["x0", "y0", "mass"], assignment_slope_data(x, y, report.plan))
    if args.plan:
        with open(args.plan, "w") as fh:
            fh.write(plan_to_csv(report.plan))
    _emit(args, payload)


def cmd_oracle(args):
    x, y = read_cloud(args.x), read_cloud(args.y)
    report = brute_force_gw(x, y)
    payload = report_to_dict(report)
    payload["permutation"] = [int(j) for j in np.argmax(report.plan.matrix, axis=1)]
    _emit(args, payload)


def cmd_selfcheck(args):
    seed = _default_seed() if args.seed is None else args.seed
    results = run_checks(seed=seed, count=args.count)
    for name, ok, failures in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}" + ("" if ok else f" ({failures}/{args.count} failed)"))
    return 0 if all(ok for _, ok, _ in results) else 1


def build_parser():
    p = argparse.ArgumentParser(prog="gwgauss", description="Gromov-Wasserstein between Gaussian measures.")
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--no-meta", action="store_true", help="omit the timestamped meta block")
    common.add_argument("-o", "--output", help="write to this file instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)

    for name, fn, helptext in (
        ("bounds", cmd_bounds, "LGW/GGW bounds, gap, gap cap and exact value when known"),
        ("map", cmd_map, "optimal affine map among Gaussian couplings"),
        ("w2", cmd_w2, "Wasserstein-2 distance and Monge map"),
    ):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("a", help="source Gaussian JSON")
        s.add_argument("b", help="target Gaussian JSON")
        if name == "map":
            s.add_argument("--signs", help="comma separated ±1 per target principal axis")
        s.set_defaults(func=fn)

    s = sub.add_parser("sweep", parents=[common], help="bounds for diag(alpha1, alpha2) vs (beta1) as CSV")
    s.add_argument("--alpha1", type=float, required=True)
    s.add_argument("--beta1", type=float, required=True)
    s.add_argument("--alpha2-range", required=True, metavar="LO:HI:STEPS")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("empirical", parents=[common], help="entropic GW between samples of two Gaussians")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--k", type=int, default=500)
    s.add_argument("--seed", type=int, default=None, help=f"defaults to ${SEED_ENV} or 0")
    s.add_argument("--epsilon", type=float, default=1.0)
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--max-outer", type=int, default=200)
    s.add_argument("--max-sinkhorn", type=int, default=2000)
    s.add_argument("--restarts", type=int, default=0)
    s.add_argument("--scatter", help="write (x0, y0, mass) scatter CSV here")
    s.add_argument("--plan", help="write the dense plan CSV here")
    s.set_defaults(func=cmd_empirical)

    s = sub.add_parser("oracle", parents=[common], help="brute-force GW over permutations (k <= 8)")
    s.add_argument("x")
    s.add_argument("y")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("selfcheck", help="invariant suite on random instances")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--count", type=int, default=50)
    s.set_defaults(func=cmd_selfcheck)
    return p


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        code = args.func(args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except GwGaussError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0 if code is None else code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
