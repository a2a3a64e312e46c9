"""Command-line front end.

``barrier-comp <command> --scenario FILE [options]``

Commands: ``eval``, ``grid``, ``filter``, ``feas``, ``simulate``, ``sweep``
and ``scan``.  ``--scenario`` takes a path to a JSON scenario or the name of
a bundled one (``example1``, ``example2``, ...).

Exit codes: 0 success, 1 invalid input, 2 infeasible (``feas``),
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from .compose import CompositionParams, error_bounds, smooth_eval
from .dynamics import leaf_lie_derivatives
from .errors import Infeasible, NonFiniteState, NumericalError, ParseError, SpecError
from .oracle import membership_grid, nonsmooth_eval
from .safety_filter import feasibility_check, filter_explicit, filter_qp_multi, random_sampler, validity_scan
from .scenario import builtin_names, load_builtin, parse_scenario, resolve_buffer
from .sim import first_entry, kappa_sweep, max_input_jump, min_turn_radius, simulate
from .spec import leaf_eval

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INFEASIBLE = 2
EXIT_NUMERICAL = 3


def _fmt(v) -> str:
    return repr(float(v))


def _load(args):
    name = args.scenario
    if not os.path.exists(name) and name in builtin_names():
        sc = load_builtin(name)
    else:
        sc = parse_scenario(name)
    if args.kappa is not None:
        sc = sc.with_kappa(args.kappa)
    if args.buffer is not None:
        sc = sc.with_buffer(_buffer_arg(args.buffer))
    return sc


def _buffer_arg(text):
    try:
        return float(text)
    except ValueError:
        return text


def _outdir(args, sc):
    out = args.out or sc.output.get("dir", "out")
    os.makedirs(out, exist_ok=True)
    return out


def _want_svg(args, sc):
    return not args.no_svg and bool(sc.output.get("svg", True))


def _state(args, sc, n):
    if args.x is not None:
        x = np.array(args.x, dtype=float)
    elif sc.init:
        x = np.array(sc.init[0])
    else:
        raise ValueError("no state given (use --x)")
    if x.size != n:
        raise ValueError(f"--x needs {n} components, got {x.size}")
    return x


def _u_des(args, sc, x):
    if args.u_des is not None:
        u = np.array(args.u_des, dtype=float)
    else:
        u = np.asarray(sc.controller(x), dtype=float)
    if u.size != sc.dynamics.m:
        raise ValueError(f"--u-des needs {sc.dynamics.m} components, got {u.size}")
    return u


def _box(args, sc):
    if args.box is not None:
        b = np.asarray(args.box, dtype=float)
        if b.size % 2:
            raise ValueError("--box takes lo hi pairs")
        return b.reshape(-1, 2)
    if sc.workspace is not None:
        return np.asarray(sc.workspace)
    raise ValueError("no workspace in scenario; pass --box")


def _print_rows(header, rows, fh=None):
    w = csv.writer(fh or sys.stdout, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_eval(args, sc):
    spec, params = sc.layered, sc.params
    x = _state(args, sc, spec.dim)
    ev = smooth_eval(spec, params, x)
    exact = nonsmooth_eval(spec, x)
    rep = error_bounds(spec, params)
    n = spec.dim
    header = ([f"x{i + 1}" for i in range(n)] + ["h", "h_c"] + [f"dh{i + 1}" for i in range(n)]
              + ["lower", "upper"])
    row = [*x, ev.value, exact.value, *ev.gradient, rep.lower, rep.upper]
    _print_rows(header, [[_fmt(v) for v in row]])
    return EXIT_OK


def cmd_grid(args, sc):
    spec = sc.layered
    if spec.dim != 2:
        raise ValueError("grid needs a 2-D state space")
    box = _box(args, sc)
    buffers = [_buffer_arg(b) for b in args.buffers] if args.buffers else [sc.buffer]
    out = _outdir(args, sc)
    grids = []
    for i, bexpr in enumerate(buffers):
        b = resolve_buffer(bexpr, spec, sc.kappa)
        grid = membership_grid(spec, CompositionParams(sc.kappa, b), box, args.res)
        grids.append(grid)
        path = os.path.join(out, "grid.csv" if len(buffers) == 1 else f"grid_{i}.csv")
        with open(path, "w", newline="") as fh:
            fh.write(f"# kappa={_fmt(sc.kappa)} buffer={bexpr} resolved={_fmt(b)}\n")
            rows = ([_fmt(p[0]), _fmt(p[1]), _fmt(h), _fmt(hc)]
                    for p, h, hc in zip(grid.points, grid.h, grid.h_c))
            _print_rows(["x1", "x2", "h", "h_c"], rows, fh)
        print(f"{path}: buffer={bexpr} smooth_only={grid.smooth_only} exact_only={grid.exact_only}")
    if _want_svg(args, sc):
        from .plotting import grid_figure, save_svg

        path = os.path.join(out, "grid.svg")
        save_svg(grid_figure(grids, spec, labels=[f"b={b}" for b in buffers]), path)
        print(path)
    return EXIT_OK


def cmd_filter(args, sc):
    spec, params = sc.layered, sc.params
    x = _state(args, sc, spec.dim)
    u_des = _u_des(args, sc, x)
    res = filter_explicit(sc.dynamics, smooth_eval(spec, params, x), sc.alpha, u_des, x)
    m = u_des.size
    header = ([f"u_des{i + 1}" for i in range(m)] + [f"u{i + 1}" for i in range(m)]
              + ["h", "eta", "residual", "case"])
    row = [_fmt(v) for v in (*u_des, *res.u_safe, res.h_value, res.eta, res.residual)] + [res.case]
    _print_rows(header, [row])
    return EXIT_OK


def cmd_feas(args, sc):
    spec = sc.layered
    x = _state(args, sc, spec.dim)
    u_des = _u_des(args, sc, x)
    evals = leaf_eval(spec, x)
    lies = leaf_lie_derivatives(sc.dynamics, evals, x)
    report = feasibility_check(lies, [h for h, _ in evals], sc.alpha)
    if report.feasible:
        u = filter_qp_multi(sc.dynamics, evals, sc.alpha, u_des, x)
        print("feasible")
        print("u_qp," + ",".join(_fmt(v) for v in u))
        return EXIT_OK
    try:
        filter_qp_multi(sc.dynamics, evals, sc.alpha, u_des, x)
    except Infeasible:
        pass
    else:  # pragma: no cover - the two solvers disagree
        raise NumericalError("LP reports infeasible but the QP found a solution")
    lam = report.violating_multipliers
    print("infeasible")
    print("multipliers," + ",".join(_fmt(v) for v in lam))
    print(f"residual,{_fmt(report.certificate_residual)}")
    print(f"gap,{_fmt(report.certificate_gap)}")
    return EXIT_INFEASIBLE


def _trajectory_svg(args, sc, trajs, name, labels=None):
    if not _want_svg(args, sc) or sc.layered.dim != 2 or sc.workspace is None:
        return
    from .plotting import save_svg, trajectory_figure

    grid = membership_grid(sc.layered, sc.params, sc.workspace, args.res)
    target = getattr(sc.controller, "target", None)
    path = os.path.join(_outdir(args, sc), name)
    save_svg(trajectory_figure(grid, sc.layered, trajs, target, labels), path)
    print(path)


def cmd_simulate(args, sc):
    out = _outdir(args, sc)
    inits = [np.array(args.x, dtype=float)] if args.x is not None else list(sc.init)
    if not inits:
        raise ValueError("scenario has no initial states (use --x)")
    trajs = []
    for i, x0 in enumerate(inits):
        try:
            tr = simulate(sc, x0=x0)
        except NonFiniteState as err:
            if err.trajectory is not None:
                err.trajectory.write_csv(os.path.join(out, f"trajectory_{i}.partial.csv"))
            raise
        path = os.path.join(out, f"trajectory_{i}.csv")
        tr.write_csv(path, header_comment=f"kappa={_fmt(sc.kappa)} buffer={sc.buffer} dt={_fmt(sc.dt)}")
        trajs.append(tr)
        entry = first_entry(tr)
        print(f"{path}: min_h={_fmt(tr.h.min())} first_safe_index={entry}")
    _trajectory_svg(args, sc, trajs, "trajectories.svg")
    return EXIT_OK


def cmd_sweep(args, sc):
    out = _outdir(args, sc)
    x0 = np.array(args.x, dtype=float) if args.x is not None else None
    trajs = kappa_sweep(sc, args.kappas, x0=x0)
    target = getattr(sc.controller, "target", None)
    rows = []
    for k, tr in zip(args.kappas, trajs):
        tr.write_csv(os.path.join(out, f"trajectory_kappa_{k:g}.csv"),
                     header_comment=f"kappa={_fmt(k)} buffer={sc.buffer} dt={_fmt(sc.dt)}")
        dist = float(np.linalg.norm(tr.final_state - np.asarray(target))) if target is not None else float("nan")
        rows.append([_fmt(k), _fmt(max_input_jump(tr)), _fmt(min_turn_radius(tr)), _fmt(tr.h.min()), _fmt(dist)])
    path = os.path.join(out, "sweep.csv")
    with open(path, "w", newline="") as fh:
        _print_rows(["kappa", "max_input_jump", "min_turn_radius", "min_h", "final_distance"], rows, fh)
    _print_rows(["kappa", "max_input_jump", "min_turn_radius", "min_h", "final_distance"], rows)
    _trajectory_svg(args, sc, trajs, "sweep.svg", labels=[f"kappa={k:g}" for k in args.kappas])
    return EXIT_OK


def cmd_scan(args, sc):
    box = _box(args, sc)
    samples = random_sampler(box, args.samples, args.seed)
    found = validity_scan(sc.layered, sc.params, sc.dynamics, sc.alpha, samples, eps_g=args.eps_g)
    out = _outdir(args, sc)
    path = os.path.join(out, "scan.csv")
    n = sc.layered.dim
    with open(path, "w", newline="") as fh:
        fh.write(f"# seed={args.seed} samples={args.samples}\n")
        rows = ([*(_fmt(v) for v in viol.x), _fmt(viol.h), _fmt(viol.lgh_norm), _fmt(viol.margin)]
                for viol in found)
        _print_rows([f"x{i + 1}" for i in range(n)] + ["h", "lgh_norm", "margin"], rows, fh)
    print(f"# seed={args.seed}")
    print(f"{path}: {len(found)} violation(s) in {args.samples} samples")
    return EXIT_OK


COMMANDS = {
    "eval": cmd_eval,
    "grid": cmd_grid,
    "filter": cmd_filter,
    "feas": cmd_feas,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "scan": cmd_scan,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="barrier-comp", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, help="scenario JSON file or bundled scenario name")
    common.add_argument("--kappa", type=float, help="override the smoothing parameter")
    common.add_argument("--buffer", help="override the buffer (number, ln(k), auto_subset, auto_superset)")
    common.add_argument("--out", help="output directory (default: scenario output.dir)")
    common.add_argument("--no-svg", action="store_true", help="skip SVG figures")
    common.add_argument("--res", type=int, default=200, help="grid resolution per axis")

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    add("eval", "composed barrier, exact value, gradient and error interval at --x").add_argument(
        "--x", type=float, nargs="+")
    g = add("grid", "membership grid CSV and contour SVG")
    g.add_argument("--box", type=float, nargs="+", help="lo hi per axis")
    g.add_argument("--buffers", nargs="+", help="one grid per buffer expression")
    f = add("filter", "explicit safety filter at --x")
    f.add_argument("--x", type=float, nargs="+")
    f.add_argument("--u-des", type=float, nargs="+")
    fe = add("feas", "joint feasibility of the per-leaf constraints at --x")
    fe.add_argument("--x", type=float, nargs="+")
    fe.add_argument("--u-des", type=float, nargs="+")
    add("simulate", "closed-loop simulation from each initial state").add_argument(
        "--x", type=float, nargs="+", help="initial state (default: scenario init)")
    s = add("sweep", "simulate across smoothing parameters")
    s.add_argument("--kappas", type=float, nargs="+", required=True)
    s.add_argument("--x", type=float, nargs="+")
    sc = add("scan", "sample the barrier condition where L_g h vanishes")
    sc.add_argument("--box", type=float, nargs="+")
    sc.add_argument("--samples", type=int, default=10000)
    sc.add_argument("--seed", type=int, default=0)
    sc.add_argument("--eps-g", type=float, default=1e-6)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = _load(args)
        return COMMANDS[args.command](args, sc)
    except (ParseError, SpecError, ValueError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    except Infeasible as err:
        print(f"infeasible: {err}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
