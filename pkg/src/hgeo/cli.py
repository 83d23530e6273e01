"""Command-line front end: profiles, constants, solvers and the property suites."""
from __future__ import annotations

import argparse
import io
import math
import sys
from typing import Sequence

import numpy as np

from . import analysis
from .closed_form import (
    RadialProfile,
    critical_lam,
    iso_constants,
    radius_for_volume,
)
from .errors import NonConvergence, RejectedInput
from .functionals import mean_curvature_radial, measure_2d, measure_radial
from .graph import DiskGraph
from .group import GroupContext
from .variational import SolverConfig, lagrange_search, solve_2d, solve_ode, solve_radial

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SUITE = 3
EXIT_NONCONVERGENCE = 4


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def fmt(x) -> str:
    """17 significant digits; integers and non-finite values verbatim."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return f"{x:.17g}"


def _json_str(s: str) -> str:
    import json

    return json.dumps(s, ensure_ascii=False)


def to_json(obj, indent: int = 0) -> str:
    """JSON in insertion key order with every float printed by fmt."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json_str(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(to_json(v, indent + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + to_json(v, indent + 1) for v in seq) + "\n" + end + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return _json_str(obj)
    if isinstance(obj, (bool, np.bool_, int, np.integer, float, np.floating)):
        return fmt(obj)
    return _json_str(str(obj))


def to_csv(header: dict, columns: Sequence[str], rows) -> str:
    buf = io.StringIO()
    for k, v in header.items():
        buf.write(f"# {k}={fmt(v) if not isinstance(v, str) else v}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _table(args, header: dict, columns: Sequence[str], rows) -> None:
    rows = [list(r) for r in rows]
    if args.format == "json":
        _emit(args, to_json({**header, "columns": list(columns), "rows": rows}))
    else:
        _emit(args, to_csv(header, columns, rows))


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _ctx(args) -> GroupContext:
    try:
        return GroupContext(args.n)
    except RejectedInput as exc:
        raise UsageError(str(exc)) from None


def _radius(args, ctx: GroupContext, required: bool = True) -> float | None:
    if args.R is not None and args.V is not None:
        raise UsageError("give either --R or --V, not both")
    if args.V is not None:
        if not args.V > 0:
            raise UsageError("--V must be positive")
        return radius_for_volume(args.V, ctx)
    if args.R is not None:
        if not args.R > 0:
            raise UsageError("--R must be positive")
        return args.R
    if required:
        return 1.0
    return None


def _grid(args, default: int, minimum: int = 2) -> int:
    g = default if args.grid is None else args.grid
    if g < minimum:
        raise UsageError(f"--grid must be at least {minimum}")
    return g


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_profile(args) -> int:
    ctx = _ctx(args)
    R = _radius(args, ctx)
    p = RadialProfile.critical(ctx.n, R)
    N = _grid(args, 256)
    r = R * np.linspace(0.0, 1.0, N + 1)
    r[-1] = R
    u = p.u(r)
    u[-1] = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        du = p.du(r)
    du[-1] = -np.inf
    header = {"R": R, "lam": p.lam, "Q": ctx.Q}
    _table(args, header, ["r", "u", "du"], zip(r, u, du))
    return EXIT_OK


def cmd_constants(args) -> int:
    ctx = _ctx(args)
    R = _radius(args, ctx)
    c = iso_constants(ctx, R)
    d = c.as_dict()
    d["ratio_identity"] = (2.0 * c.volume_half) ** ((c.Q - 1) / c.Q) / (2.0 * c.perimeter_half)
    _emit(args, to_json(d))
    return EXIT_OK


def cmd_measure(args) -> int:
    ctx = _ctx(args)
    R = _radius(args, ctx)
    p = RadialProfile.critical(ctx.n, R)
    out = {"R": R, "Q": ctx.Q, "radial": measure_radial(p, ctx).as_dict()}
    if args.grid is not None:
        if ctx.n != 1:
            raise UsageError("grid measurement is available for n = 1 only")
        N = _grid(args, 256, minimum=16)
        g = DiskGraph.from_radial(p.u, N, R)
        rep = measure_2d(g).as_dict()
        rep["characteristic_points"] = rep["characteristic_points"][:16]
        out["grid"] = {"N": N, **rep}
    _emit(args, to_json(out))
    return EXIT_OK


def cmd_curvature(args) -> int:
    ctx = _ctx(args)
    R = _radius(args, ctx)
    lam = critical_lam(R, ctx) if args.lam is None else args.lam
    try:
        p = RadialProfile(ctx.n, R, lam)
    except RejectedInput as exc:
        raise UsageError(str(exc)) from None
    N = _grid(args, 100)
    s = p.s_max * (np.arange(1, N + 1) / (N + 1))
    H = mean_curvature_radial(p, s)
    _table(args, {"R": R, "lam": lam, "Q": ctx.Q}, ["s", "H"], zip(s, H))
    return EXIT_OK


def cmd_ode(args) -> int:
    ctx = _ctx(args)
    R = _radius(args, ctx)
    lam = critical_lam(R, ctx) if args.lam is None else args.lam
    try:
        prof = solve_ode(lam, R, ctx, samples=_grid(args, 1024) + 1)
    except RejectedInput as exc:
        raise UsageError(str(exc)) from None
    header = {"R": R, "lam": lam, "Q": ctx.Q, "half_volume": prof.half_volume}
    _table(args, header, ["r", "u", "F"], zip(prof.r, prof.u, prof.F))
    return EXIT_OK


def cmd_search(args) -> int:
    ctx = _ctx(args)
    if args.V is None or args.R is not None:
        raise UsageError("search needs --V (and no --R)")
    if not args.V > 0:
        raise UsageError("--V must be positive")
    tol = 1e-13 if args.tol is None else args.tol
    R, lam = lagrange_search(args.V, ctx, tol=tol)
    _emit(args, to_json({"V": args.V, "Q": ctx.Q, "R": R, "lam": lam,
                         "R_closed_form": radius_for_volume(args.V, ctx)}))
    return EXIT_OK


def cmd_solve(args) -> int:
    ctx = _ctx(args)
    R = _radius(args, ctx)
    mode = args.mode
    if mode == "2d" and ctx.n != 1:
        raise UsageError("the 2d solver needs --n 1")
    default = 4096 if mode == "radial" else 256
    grid = _grid(args, default, minimum=64)
    kw = {"grid_size": grid, "lam": args.lam}
    if args.tol is not None:
        kw["tol_energy"] = args.tol
    if args.max_iter is not None:
        kw["max_iter"] = args.max_iter
    try:
        cfg = SolverConfig(**kw)
    except RejectedInput as exc:
        raise UsageError(str(exc)) from None
    if mode == "radial":
        _, report = solve_radial(cfg, R, ctx)
    else:
        _, report = solve_2d(cfg, R)
    if args.format == "csv":
        buf = io.StringIO()
        rows = zip(range(len(report.energy_trace)), report.energy_trace,
                   report.constraint_trace, report.sup_error_trace)
        buf.write(to_csv({}, ["iter", "energy", "constraint_residual", "sup_error"], rows))
        _emit(args, buf.getvalue())
    else:
        d = report.as_dict()
        d["extras"].pop("elapsed_s", None)
        d["extras"].pop("spread_trace", None)
        _emit(args, to_json(d))
    if not report.converged:
        sys.stderr.write("solver did not converge within max_iter\n")
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def cmd_flow(args) -> int:
    R = _radius(args, GroupContext(1))
    z0 = np.array(args.z0, dtype=float)
    try:
        fr = analysis.characteristic_flow(z0, args.rho0, R)
    except RejectedInput as exc:
        raise UsageError(str(exc)) from None
    if args.format == "json":
        _emit(args, to_json(fr.as_dict()))
        return EXIT_OK
    stride = max(1, len(fr.s) // (args.grid or 2000))
    idx = np.arange(0, len(fr.s), stride)
    if idx[-1] != len(fr.s) - 1:
        idx = np.append(idx, len(fr.s) - 1)
    g = fr.grad_phi_sq()
    header = {"R": R, "rho0": args.rho0, "x0": z0[0], "y0": z0[1], "s_max": fr.s_max}
    _table(args, header, ["s", "x", "y", "rho", "grad_phi_sq"],
           ((fr.s[i], fr.z[i, 0], fr.z[i, 1], fr.rho[i], g[i]) for i in idx))
    return EXIT_OK


def run_checks(seed: int | None = None, quick: bool = False) -> list[analysis.SuiteSummary]:
    seeds = dict(analysis.SEEDS)
    if seed is not None:
        seeds = {k: seed + i for i, k in enumerate(seeds)}
    per_dim = 200 if quick else 1000
    samples = 100_000 if quick else 1_000_000
    return [
        analysis.constants_suite(),
        analysis.eigen_suite(per_dim=per_dim, seed=seeds["eigen"]),
        analysis.gap_suite(samples=samples, seed=seeds["gap"]),
        analysis.inequality_suite(samples=samples // 10, seed=seeds["inequality"]),
        analysis.scaling_suite(),
        analysis.gateaux_suite(seed=seeds["gateaux"]),
        analysis.curvature_suite(),
        analysis.regularity_suite(),
    ]


def cmd_check(args) -> int:
    suites = run_checks(args.seed, args.quick)
    failing = [s.name for s in suites if not s.passed]
    out = {
        "passed": not failing,
        "failing": failing,
        "suites": [s.as_dict() for s in suites],
    }
    _emit(args, to_json(out))
    if failing:
        sys.stderr.write("failing invariants: " + ", ".join(failing) + "\n")
        return EXIT_SUITE
    return EXIT_OK


COMMANDS = {
    "profile": cmd_profile,
    "measure": cmd_measure,
    "curvature": cmd_curvature,
    "solve": cmd_solve,
    "ode": cmd_ode,
    "search": cmd_search,
    "check": cmd_check,
    "constants": cmd_constants,
    "flow": cmd_flow,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--n", type=int, default=1, help="Heisenberg group index (Q = 2n + 2)")
    common.add_argument("--R", type=float, default=None, help="radius of the support disk")
    common.add_argument("--V", type=float, default=None, help="enclosed volume (alternative to --R)")
    common.add_argument("--lam", type=float, default=None, help="Lagrange multiplier")
    common.add_argument("--grid", type=int, default=None, help="grid size / number of samples")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--seed", type=int, default=None, help="Monte Carlo seed")
    common.add_argument("--tol", type=float, default=None, help="tolerance")
    parser = _Parser(prog="hgeo", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    helps = {
        "profile": "sample the isoperimetric profile (CSV: r, u, du)",
        "measure": "perimeter, volume and iso ratio of the profile",
        "curvature": "H-mean curvature along the profile",
        "solve": "recover the minimizer by descent",
        "ode": "profile from the reduced Euler-Lagrange equation",
        "search": "multiplier search for a prescribed volume",
        "check": "run the property suites",
        "constants": "closed-form constants",
        "flow": "characteristic curve of the transport system",
    }
    default_format = {"constants": "json", "measure": "json", "search": "json", "check": "json",
                      "solve": "json"}
    for name, text in helps.items():
        sp = sub.add_parser(name, parents=[common], help=text)
        sp.set_defaults(default_format=default_format.get(name, "csv"))
        if name == "solve":
            sp.add_argument("--mode", choices=("radial", "2d"), default="radial")
            sp.add_argument("--max-iter", dest="max_iter", type=int, default=None)
        if name == "flow":
            sp.add_argument("--z0", type=float, nargs=2, default=(0.3, 0.2), metavar=("X", "Y"))
            sp.add_argument("--rho0", type=float, default=0.5)
        if name == "check":
            sp.add_argument("--quick", action="store_true", help="smaller Monte Carlo samples")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.format is None:
            args.format = args.default_format
        return COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"hgeo: error: {exc}\n")
        return EXIT_USAGE
    except NonConvergence as exc:
        sys.stderr.write(f"hgeo: {exc}\n")
        return EXIT_NONCONVERGENCE
    except RejectedInput as exc:
        sys.stderr.write(f"hgeo: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
