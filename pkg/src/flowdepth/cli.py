"""``flowdepth`` command line.

Every subcommand prints one JSON object (or CSV rows) on stdout.  Floats are
written with 17 significant digits so repeated runs are byte-identical.

Exit codes: 0 ok, 2 bad usage, 3 domain error, 4 verification failure or
exceeded budget.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np
from scipy.integrate import trapezoid

from . import circle_ln, core1d, flow_engine, l1_interp, lift2d, relu1d_metric, so3_metric, verify
from .errors import BudgetExceeded, DomainError, NonPositiveSlope

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_FAILED = 0, 2, 3, 4
GRID_ENV = "FLOWDEPTH_GRID"
CONTOUR_METRICS = ("flow", "l2")


def default_grid(fallback: int) -> int:
    """``FLOWDEPTH_GRID`` if set, else ``fallback``."""
    raw = os.environ.get(GRID_ENV)
    if not raw:
        return fallback
    try:
        value = int(raw)
    except ValueError:
        raise DomainError(f"{GRID_ENV}={raw!r} is not an integer") from None
    if value < 2:
        raise DomainError(f"{GRID_ENV} must be at least 2")
    return value


def encode(obj) -> str:
    """JSON with floats in ``.17g``; non-finite floats become strings."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else json.dumps(str(x))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(encode(v) for v in obj) + "]"
    return json.dumps(obj)


def _emit(obj, out):
    out.write(encode(obj) + "\n")


def _write_csv(header, rows, target):
    if target is None or target == "-":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        w.writerows([[_fmt(v) for v in r] for r in rows])
        return
    with open(target, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows([[_fmt(v) for v in r] for r in rows])


def _fmt(v):
    return format(float(v), ".17g") if isinstance(v, (float, np.floating)) else v


# ---------------------------------------------------------------------------
# contour


def barycentric_grid(g: int):
    """Points ``(i, j, k)/g`` with ``i + j + k = g``, in lexicographic order."""
    if g < 3 or g % 3:
        raise DomainError("contour grid must be a positive multiple of 3 so the centre is a node")
    return [(i / g, j / g, (g - i - j) / g) for i in range(g + 1) for j in range(g + 1 - i)]


def l2_to_identity(psi, n: int) -> float:
    x = np.linspace(0.0, 1.0, n + 1)
    d2 = (np.asarray(psi(x)) - x) ** 2
    return math.sqrt(float(trapezoid(d2, x)))


def run_contour(g: int = 60, metric: str = "flow", n: int = 4096):
    """Rows ``(a, b, c, value)``: distance from the identity (the centre) to the blended map."""
    if metric not in CONTOUR_METRICS:
        raise DomainError(f"metric must be one of {CONTOUR_METRICS}")
    ident = core1d.smooth_map("identity")
    rows = []
    for a, b, c in barycentric_grid(g):
        psi = core1d.barycentric_map(a, b, c)
        if metric == "flow":
            value = relu1d_metric.distance(ident, psi)
        else:
            value = l2_to_identity(psi, n)
        rows.append((a, b, c, value))
    return rows


def read_contour_csv(path_or_text):
    text = path_or_text
    if "\n" not in path_or_text:
        with open(path_or_text, encoding="utf-8") as fh:
            text = fh.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != ["a", "b", "c", "value"]:
        raise DomainError(f"unexpected contour header {header}")
    return [tuple(float(v) for v in row) for row in reader if row]


# ---------------------------------------------------------------------------
# subcommands


def cmd_dist(args, out):
    psi1, psi2 = core1d.parse_map(args.psi1), core1d.parse_map(args.psi2)
    report = {"psi1": args.psi1, "psi2": args.psi2}
    try:
        report["d_F"] = relu1d_metric.distance(psi1, psi2, grid=args.grid)
        report["legacy_upper"] = relu1d_metric.legacy_upper_bound(psi2, psi1, grid=args.grid)
    except NonPositiveSlope:
        report.update(d_F="infinite", legacy_upper="infinite", grid=args.grid)
        _emit(report, out)
        return EXIT_DOMAIN
    report["grid"] = args.grid
    _emit(report, out)
    return EXIT_OK


def cmd_geodesic(args, out):
    psi1, psi2 = core1d.parse_map(args.psi1), core1d.parse_map(args.psi2)
    point = relu1d_metric.geodesic_point(psi1, psi2, args.t, args.grid)
    if args.format == "csv":
        core1d.write_pwl_csv(point, out)
        return EXIT_OK
    _emit({
        "psi1": args.psi1, "psi2": args.psi2, "steps": args.steps, "grid": args.grid,
        "t": args.t,
        "length": relu1d_metric.geodesic_length(psi1, psi2, args.steps, args.grid),
        "d_F": relu1d_metric.distance(psi1, psi2),
        "midpoint_value": float(point(0.5)),
    }, out)
    return EXIT_OK


def cmd_contour(args, out):
    rows = run_contour(args.grid, args.metric, args.n)
    if args.output:
        _write_csv(["a", "b", "c", "value"], rows, args.output)
    else:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["a", "b", "c", "value"])
        w.writerows([[_fmt(v) for v in r] for r in rows])
    return EXIT_OK


def cmd_interp(args, out):
    if args.csv:
        g = core1d.read_grid_csv(args.csv)
        problem = l1_interp.InterpProblem.from_values(g.values)
    elif args.fn:
        problem = l1_interp.InterpProblem.sample(core1d.bv_function(args.fn), args.N)
    else:
        raise DomainError("interp needs --csv PATH or --fn NAME")
    S = float(l1_interp.min_weight(problem))
    wit = l1_interp.witness(problem)
    feasible = wit.residual(problem) < 1e-10 and abs(wit.cost() - S) <= 1e-10 * max(1.0, S)
    _emit({
        "N": problem.N,
        "min_weight": S,
        "lp_oracle": l1_interp.lp_oracle(problem) if problem.N <= 64 else None,
        "witness_feasible": bool(feasible),
    }, out)
    return EXIT_OK


def cmd_realize(args, out):
    psi = core1d.parse_map(args.target)
    code = EXIT_OK
    try:
        rep = flow_engine.realize_geodesic(
            psi, args.delta, args.steps, args.nodes, n_grid=args.grid,
            trajectory_points=args.trajectory_points if args.trajectory else 0, label=args.target)
    except BudgetExceeded as exc:
        rep, code = exc.report, EXIT_FAILED
    payload = rep.as_dict()
    payload.update(relu_weight_time=rep.relu_weight_time, depth_tv=rep.depth_tv,
                   within_budget=code == EXIT_OK)
    if args.trajectory:
        _write_csv(["t", "x0", "x_t"], rep.trajectory, args.trajectory)
    _emit(payload, out)
    return code


def _parse_domain(text):
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 2:
        raise DomainError(f"domain must be 'a,b', got {text!r}")
    return float(parts[0]), float(parts[1])


def cmd_lift(args, out):
    f = lift2d.scalar_target(args.fn)
    K = _parse_domain(args.domain)
    auto = lift2d.LiftConfig.auto(f, K, args.grid)
    cfg = lift2d.LiftConfig(f, K, args.lam if args.lam is not None else auto.lam,
                            args.kappa if args.kappa is not None else auto.kappa)
    _emit({
        "fn": args.fn, "domain": list(K), "lambda": cfg.lam, "kappa": cfg.kappa,
        "sup_error": lift2d.verify_factorization(cfg, args.grid),
        "segment_margin": cfg.segment_margin(args.grid),
    }, out)
    return EXIT_OK


def parse_rotation(text: str):
    """``axis=x,y,z;angle=r`` to a rotation matrix."""
    fields = {}
    for part in text.split(";"):
        if "=" not in part:
            raise DomainError(f"bad rotation spec {text!r}")
        key, value = part.split("=", 1)
        fields[key.strip()] = value
    if set(fields) != {"axis", "angle"}:
        raise DomainError("rotation spec needs exactly axis=... and angle=...")
    axis = np.array([float(v) for v in fields["axis"].split(",")])
    if axis.size != 3:
        raise DomainError("axis needs three components")
    return so3_metric.axis_rotation(axis, float(fields["angle"]))


def read_matrix_csv(path):
    with open(path, encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    try:
        R = np.array([[float(v) for v in r] for r in rows])
    except ValueError:
        raise DomainError(f"{path}: matrix CSV must hold 3 rows of 3 numbers") from None
    if R.shape != (3, 3):
        raise DomainError(f"{path}: matrix CSV must hold 3 rows of 3 numbers")
    return R


def cmd_so3(args, out):
    R = parse_rotation(args.rotation) if args.rotation else read_matrix_csv(args.matrix)
    so3_metric.check_rotation(R)
    b = so3_metric.d_l1_bounds(np.eye(3), R)
    _emit({
        "theta": so3_metric.angle(R),
        "l1_lower": b.lower,
        "l1_log_upper": b.log_upper,
        "l1_euler_upper": b.euler_upper,
        "euler_sequence": b.euler_sequence,
        "euler_angles": list(b.euler_angles),
    }, out)
    return EXIT_OK


def cmd_circle_bound(args, out):
    psi1, psi2 = circle_ln.circle_map(args.psi1), circle_ln.circle_map(args.psi2)
    g = circle_ln.global_bound_functional(psi1, psi2, args.grid)
    payload = {
        "psi1": args.psi1, "psi2": args.psi2, "beta": args.beta, "modes": args.modes,
        "grid": args.grid, "J": g.J, "sup_term": g.sup_term, "J_path": g.J_path,
        "a_n_checksum": circle_ln.an_checksum(args.beta, args.modes),
    }
    if args.path_energy:
        payload["path_energy"] = circle_ln.path_energy(psi1, psi2, args.grid)
    _emit(payload, out)
    return EXIT_OK


def cmd_verify(args, out):
    filters = None
    if args.filter:
        filters = {f.strip() for item in args.filter for f in item.split(",") if f.strip()}
        known = set(verify.MODULES) | {p.name for p in verify.PROPERTIES}
        unknown = filters - known
        if unknown:
            raise DomainError(f"unknown filter {sorted(unknown)}; modules are {list(verify.MODULES)}")
    report = verify.run(filters, seed=args.seed, fault=args.inject_fault)
    _emit(report, out)
    return EXIT_OK if report["passed"] else EXIT_FAILED


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flowdepth", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("dist", help="flow distance between two interval maps")
    s.add_argument("--psi1", default="identity", help="map spec or pwl CSV (default identity)")
    s.add_argument("--psi2", required=True, help="map spec or pwl CSV")
    s.add_argument("--grid", type=int, default=default_grid(256),
                   help="starting grid for smooth TV refinement (default 256)")
    s.set_defaults(run=cmd_dist)

    s = sub.add_parser("geodesic", help="minimal path between two maps")
    s.add_argument("--psi1", default="identity")
    s.add_argument("--psi2", required=True)
    s.add_argument("--steps", type=int, default=relu1d_metric.DEFAULT_STEPS, help="default 64")
    s.add_argument("--grid", type=int, default=default_grid(relu1d_metric.DEFAULT_GRID),
                   help="default 4096")
    s.add_argument("--t", type=float, default=0.5, help="time of the reported point (default 0.5)")
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.set_defaults(run=cmd_geodesic)

    s = sub.add_parser("contour", help="barycentric contour data, CSV a,b,c,value")
    s.add_argument("--grid", type=int, default=60, help="subdivisions per edge (default 60)")
    s.add_argument("--metric", choices=CONTOUR_METRICS, default="flow")
    s.add_argument("--n", type=int, default=default_grid(4096),
                   help="quadrature grid for the l2 metric (default 4096)")
    s.add_argument("--output", help="CSV path (default stdout)")
    s.set_defaults(run=cmd_contour)

    s = sub.add_parser("interp", help="minimal-weight ReLU interpolation")
    s.add_argument("--csv", help="grid CSV with header x,u")
    s.add_argument("--fn", choices=core1d.BV_NAMES, help="registry function instead of --csv")
    s.add_argument("--N", type=int, default=16, help="intervals when sampling --fn (default 16)")
    s.set_defaults(run=cmd_interp)

    s = sub.add_parser("realize", help="follow the geodesic with exact ReLU flows")
    s.add_argument("--target", default="exp_map")
    s.add_argument("--delta", type=float, default=0.15, help="budget slack (default 0.15)")
    s.add_argument("--steps", type=int, default=32, help="geodesic steps k (default 32)")
    s.add_argument("--nodes", type=int, default=64, help="interpolation intervals N (default 64)")
    s.add_argument("--grid", type=int, default=default_grid(relu1d_metric.DEFAULT_GRID),
                   help="geodesic grid (default 4096)")
    s.add_argument("--trajectory", help="write t,x0,x_t CSV here")
    s.add_argument("--trajectory-points", type=int, default=33, help="tracked points (default 33)")
    s.set_defaults(run=cmd_realize)

    s = sub.add_parser("lift", help="check the planar lift of a scalar map")
    s.add_argument("--fn", choices=lift2d.TARGET_NAMES, default="square")
    s.add_argument("--domain", default="-1,1", help="interval 'a,b' (default -1,1)")
    s.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="input scaling (default: fit the domain into radius 1/2)")
    s.add_argument("--kappa", type=float, default=None, help="output scaling (default: auto)")
    s.add_argument("--grid", type=int, default=1000, help="check points (default 1000)")
    s.set_defaults(run=cmd_lift)

    s = sub.add_parser("so3", help="distance bounds from the identity rotation")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--rotation", help="'axis=x,y,z;angle=r'")
    g.add_argument("--matrix", help="CSV with three rows of three numbers")
    s.set_defaults(run=cmd_so3)

    s = sub.add_parser("circle-bound", help="global bound functional on the circle")
    s.add_argument("--psi1", default="identity", help="identity or warp(c,m[,shift])")
    s.add_argument("--psi2", default="warp(0.05,1)")
    s.add_argument("--beta", type=float, default=circle_ln.DEFAULT_BETA,
                   help="kernel angle (default pi*(sqrt5-1)/2)")
    s.add_argument("--modes", type=int, default=32, help="kernel modes in the checksum (default 32)")
    s.add_argument("--grid", type=int, default=default_grid(1024), help="default 1024")
    s.add_argument("--path-energy", action="store_true", help="also integrate the path energy")
    s.set_defaults(run=cmd_circle_bound)

    s = sub.add_parser("verify", help="run the randomised invariant suite")
    s.add_argument("--filter", action="append", help="module or property name; repeatable")
    s.add_argument("--seed", type=int, default=verify.DEFAULT_SEED)
    s.add_argument("--inject-fault", choices=(l1_interp.MIN_SN_SIGN_FAULT,),
                   help="test hook: corrupt a known formula")
    s.set_defaults(run=cmd_verify)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        parser = build_parser()
    except DomainError as exc:
        print(f"flowdepth: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.run(args, out)
    except DomainError as exc:
        print(f"flowdepth: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (OSError, csv.Error) as exc:
        print(f"flowdepth: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
