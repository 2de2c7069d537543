"""Command-line interface: ``chordal-ph <command> ...``.

Exit codes: 0 success, 2 validation failure, 3 numerical degeneracy,
4 I/O error.  All JSON goes to stdout (or ``--output``) with 17
significant digits.
"""
import argparse
import json
import os
import sys

import numpy as np

from . import _accel
from ._jsonio import dumps
from .critical import ClassificationError, conley_agreement, enumerate_critical_chords
from .loop import LoopError, build_loop, check_nondegeneracy
from .nerve import NerveError, build_nerve
from .oracle import GridError, build_grid, export_heatmap
from .persistence import bottleneck, is_prime, square_map
from .smooth import BUILTIN_CURVES, ellipse_polygon, find_smooth_critical
from .volume import random_stability_trials

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def read_points(path, fmt=None):
    """Read an (n, d) point array from CSV or JSON ({"points": [...]})."""
    if fmt is None:
        fmt = "json" if str(path).lower().endswith(".json") else "csv"
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path) as fh:
                text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from exc
    try:
        if fmt == "json":
            pts = np.asarray(json.loads(text)["points"], dtype=float)
        else:
            rows = [line for line in text.splitlines() if line.strip() and not line.startswith("#")]
            pts = np.asarray([[float(v) for v in line.split(",")] for line in rows], dtype=float)
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(f"cannot parse {path} as {fmt}: {exc}", EXIT_VALIDATION) from exc
    if pts.ndim != 2:
        raise CliError("input must contain one point per row", EXIT_VALIDATION)
    return pts


def perturb(points, eps, seed):
    """Seeded uniform jitter of every coordinate in [-eps, eps]."""
    if eps < 0:
        raise CliError("--perturb must be nonnegative", EXIT_VALIDATION)
    if eps == 0:
        return points
    rng = np.random.default_rng(seed)
    return points + rng.uniform(-eps, eps, size=points.shape)


def load_loop(args, path=None):
    pts = read_points(path or args.input, args.format)
    pts = perturb(pts, args.perturb, args.seed)
    try:
        return build_loop(pts)
    except LoopError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from exc


def emit(args, obj):
    text = dumps(obj) + "\n"
    out = getattr(args, "output", None)
    if out:
        try:
            with open(out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise CliError(f"cannot write {out}: {exc}", EXIT_IO) from exc
    else:
        sys.stdout.write(text)


def _diagram(loop, p, unsquared):
    try:
        nc = build_nerve(loop)
    except NerveError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from exc
    diag = nc.persistence(p)
    if unsquared:
        diag = square_map(diag, "to_unsquared")
    return nc, diag


def cmd_check(args):
    loop = load_loop(args)
    rep = check_nondegeneracy(loop, args.tol)
    emit(args, rep.to_dict())
    return EXIT_OK if rep.ok else EXIT_VALIDATION


def cmd_diagram(args):
    loop = load_loop(args)
    nc, diag = _diagram(loop, args.p, args.unsquared)
    if args.export_complex:
        try:
            with open(args.export_complex, "w") as fh:
                fh.write(nc.to_text())
        except OSError as exc:
            raise CliError(f"cannot write {args.export_complex}: {exc}", EXIT_IO) from exc
    emit(args, diag.to_dict())
    return EXIT_OK


def cmd_critical(args):
    loop = load_loop(args)
    rep = check_nondegeneracy(loop, args.tol)
    if not rep.embedded:
        raise CliError(f"loop is not embedded: {rep.to_dict()}", EXIT_VALIDATION)
    if rep.c3_violations:
        raise CliError("C3 fails (parallel edges); classification is unsound. "
                       "Re-run with --perturb EPS --seed S to break the degeneracy.",
                       EXIT_VALIDATION)
    nc = build_nerve(loop, validate=False)
    try:
        chords = enumerate_critical_chords(loop, tol=args.right_tol, nc=nc)
    except ClassificationError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from exc
    agreement = conley_agreement(loop, chords=chords, nc=nc, p=args.p)
    emit(args, {"chords": [c.to_dict() for c in chords], "agreement": agreement.to_dict()})
    return EXIT_OK if agreement.ok else EXIT_NUMERIC


def cmd_heatmap(args):
    loop = load_loop(args)
    try:
        grid = build_grid(loop, args.m)
    except GridError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from exc
    try:
        paths = export_heatmap(grid, args.output_csv)
    except OSError as exc:
        raise CliError(f"cannot write heatmap: {exc}", EXIT_IO) from exc
    h = grid.heatmap()
    emit(args, {"m": grid.m, "files": paths, "min": float(h.min()), "max": float(h.max())})
    return EXIT_OK


def cmd_compare(args):
    la = load_loop(args, args.input)
    lb = load_loop(args, args.other)
    _, da = _diagram(la, args.p, args.unsquared)
    _, db = _diagram(lb, args.p, args.unsquared)
    dims = [args.dim] if args.dim is not None else [0, 1, 2]
    emit(args, {"p": args.p, "unsquared": bool(args.unsquared),
                "bottleneck": {str(k): bottleneck(da, db, k) for k in dims}})
    return EXIT_OK


def cmd_smooth(args):
    if args.curve == "ellipse":
        curve = BUILTIN_CURVES["ellipse"](args.a, args.b)
    elif args.curve == "circle":
        curve = BUILTIN_CURVES["circle"](args.r)
    else:
        curve = BUILTIN_CURVES["trefoil"]()
    points, failures = find_smooth_critical(curve, grid_n=args.grid_n, newton_iters=args.newton_iters)
    emit(args, {"curve": curve.name, "failed_seeds": failures,
                "points": [pt.to_dict() for pt in points]})
    return EXIT_OK


def cmd_volume(args):
    out = []
    ok = True
    for k in args.k:
        if k < 1 or k > args.d:
            raise CliError(f"k = {k} is out of range for d = {args.d}", EXIT_VALIDATION)
        reps = random_stability_trials(k, d=args.d, trials=args.trials, seed=args.seed)
        ok &= all(r.ok for r in reps)
        out.append({"k": k, "trials": [r.to_dict() for r in reps],
                    "violations": sum(not r.ok for r in reps)})
    emit(args, {"ok": ok, "results": out})
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_sample(args):
    if args.curve == "ellipse":
        pts = ellipse_polygon(args.a, args.b, args.n)
    else:
        th = 2 * np.pi * np.arange(args.n) / args.n
        pts = np.column_stack([args.r * np.cos(th), args.r * np.sin(th)])
    if args.format == "json":
        emit(args, {"points": pts.tolist()})
    else:
        text = "".join(",".join(format(v, ".17g") for v in row) + "\n" for row in pts)
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="chordal-ph", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: CHORDAL_PH_THREADS or all cores)")
    sub = parser.add_subparsers(dest="command", required=True)

    def loop_args(sp, two=False):
        sp.add_argument("input")
        if two:
            sp.add_argument("other")
        sp.add_argument("--format", choices=["csv", "json"], default=None)
        sp.add_argument("--perturb", type=float, default=0.0, metavar="EPS",
                        help="uniform jitter of each coordinate in [-EPS, EPS]")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("-o", "--output", default=None)

    sp = sub.add_parser("check", help="check the non-degeneracy conditions C1-C3")
    loop_args(sp)
    sp.add_argument("--tol", type=float, default=None)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("diagram", help="persistence diagram of the exact nerve filtration")
    loop_args(sp)
    sp.add_argument("-p", type=int, default=3)
    sp.add_argument("--unsquared", action="store_true")
    sp.add_argument("--export-complex", default=None, metavar="PATH")
    sp.set_defaults(func=cmd_diagram)

    sp = sub.add_parser("critical", help="classified critical chords and Conley agreement")
    loop_args(sp)
    sp.add_argument("-p", type=int, default=3)
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--right-tol", type=float, default=1e-8)
    sp.set_defaults(func=cmd_critical)

    sp = sub.add_parser("heatmap", help="grid heatmap of the unsquared transform")
    loop_args(sp)
    sp.add_argument("-m", type=int, default=256)
    sp.add_argument("--output-csv", required=True)
    sp.set_defaults(func=cmd_heatmap)

    sp = sub.add_parser("compare", help="bottleneck distance between two loops' diagrams")
    loop_args(sp, two=True)
    sp.add_argument("-p", type=int, default=3)
    sp.add_argument("--dim", type=int, default=None)
    sp.add_argument("--unsquared", action="store_true")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("smooth", help="critical chords of a built-in smooth curve")
    sp.add_argument("curve", choices=sorted(BUILTIN_CURVES))
    sp.add_argument("--a", type=float, default=2.0)
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--r", type=float, default=1.0)
    sp.add_argument("--grid-n", type=int, default=24)
    sp.add_argument("--newton-iters", type=int, default=60)
    sp.add_argument("-o", "--output", default=None)
    sp.set_defaults(func=cmd_smooth)

    sp = sub.add_parser("volume", help="randomized check of the volume-transform stability bound")
    sp.add_argument("--k", type=int, nargs="+", default=[1, 2, 3])
    sp.add_argument("--d", type=int, default=4)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--output", default=None)
    sp.set_defaults(func=cmd_volume)

    sp = sub.add_parser("sample", help="write a built-in PL loop (ellipse or circle) as CSV/JSON")
    sp.add_argument("curve", choices=["ellipse", "circle"])
    sp.add_argument("-n", type=int, default=200)
    sp.add_argument("--a", type=float, default=2.0)
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--r", type=float, default=1.0)
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.add_argument("-o", "--output", default=None)
    sp.set_defaults(func=cmd_sample)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    threads = args.threads if args.threads is not None else os.environ.get("CHORDAL_PH_THREADS")
    _accel.set_threads(threads)
    if hasattr(args, "p") and not is_prime(args.p):
        print(f"error: -p must be prime, got {args.p}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (FloatingPointError, AssertionError) as exc:
        print(f"numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
