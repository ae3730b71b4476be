"""Command-line front end.

Every action runs a computation, phrases its verdict as a sup-versus-
budget comparison in a report, and exits 0 on pass, 2 on a verification
failure, 1 on a usage or configuration error.  Reports serialize to
byte-stable JSON (or CSV) and can be written atomically to a file.
"""

import argparse
import math
import sys

import numpy as np

from . import acceptance
from .catenoid import (
    CatenoidSpec,
    empirical_threshold,
    estimate_bound,
    solve_parameters,
)
from .doubling import assemble_doubled_sweepout, default_schedule
from .errors import BudgetViolated, CatsweepError, NonConvergence, SolverFailure
from .fermi import (
    NormalGraphField,
    build_cutoff,
    cutoff_energy,
    graph_area_exact,
    two_sided_tube_family,
)
from .mesh import geodesic_distances, level_set_perimeter
from .neckscaling import cost_exponent_fit
from .report import make_report, report_to_csv, report_to_json, write_atomic
from .revolution import excess_scaling_comparison, mountain_pass_width
from .surfaces import clifford_torus, disk_rings_for_cutoff, flat_disk


class _Parser(argparse.ArgumentParser):
    # usage errors must exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("error: %s\n" % message)
        raise SystemExit(1)


def _cmd_catenoid_solve(args):
    sol = solve_parameters(CatenoidSpec(r=args.r, h=args.h))
    bound = estimate_bound(args.r, args.h)
    rows = [
        {
            "t": args.h,
            "area": sol.area_unstable,
            "c_unstable": sol.c_unstable,
            "c_stable": sol.c_stable,
            "area_stable": sol.area_stable,
            "bound_value": bound,
        }
    ]
    return make_report(
        "catenoid-solve", {"r": args.r, "h": args.h}, rows, bound, stamp=args.stamp
    )


def _cmd_catenoid_scan(args):
    h0 = empirical_threshold(args.r)
    rows = []
    h = 0.1
    while h >= 1e-6:
        sol = solve_parameters(CatenoidSpec(r=args.r, h=h))
        bound = estimate_bound(args.r, h)
        rows.append(
            {
                "t": h,
                "area": sol.area_unstable - bound,
                "area_unstable": sol.area_unstable,
                "bound_value": bound,
            }
        )
        h *= 0.5
    rep = make_report("catenoid-scan", {"r": args.r}, rows, 0.0, stamp=args.stamp)
    rep.summary["h_threshold"] = h0
    return rep


def _cmd_width_run(args):
    ref = solve_parameters(CatenoidSpec(r=args.r, h=args.h)).area_unstable
    res = mountain_pass_width(args.r, args.h)
    rows = [
        {
            "t": args.h,
            "area": abs(res.width / ref - 1.0),
            "width": res.width,
            "reference_area": ref,
            "argmax_t": res.argmax_t,
            "iterations": res.iterations,
        }
    ]
    return make_report(
        "width-run",
        {"r": args.r, "h": args.h, "tolerance": args.tolerance},
        rows,
        args.tolerance,
        stamp=args.stamp,
    )


def _cmd_width_excess(args):
    grid = tuple(10.0 ** (-k) for k in range(2, 8))
    comp = excess_scaling_comparison(args.r, grid)
    rows = [{"t": 0.0, "area": abs(comp.slope - 1.0), "slope": comp.slope}]
    return make_report(
        "width-excess",
        {"r": args.r, "h_grid": list(grid), "tolerance": 0.25},
        rows,
        0.25,
        stamp=args.stamp,
    )


def _cmd_fermi_quad(args):
    cl = clifford_torus(args.n)
    ones = np.ones(cl.n_vertices)
    d = args.step
    a0 = graph_area_exact(NormalGraphField(cl, ones, 0.0))
    ap = graph_area_exact(NormalGraphField(cl, ones, d))
    am = graph_area_exact(NormalGraphField(cl, ones, -d))
    coeff = 0.5 * (ap - 2.0 * a0 + am) / (d * d)
    target = -4.0 * math.pi ** 2
    rows = [
        {
            "t": d,
            "area": abs(coeff / target - 1.0),
            "coefficient": coeff,
            "target": target,
            "base_area": a0,
        }
    ]
    return make_report(
        "fermi-quad",
        {"n": args.n, "step": d, "tolerance": 0.01},
        rows,
        0.01,
        stamp=args.stamp,
    )


def _cmd_fermi_tubes(args):
    cl = clifford_torus(args.n)
    ones = np.ones(cl.n_vertices)
    p = args.n // 4 * args.n + 3 * args.n // 4
    p_swap = 3 * args.n // 4 * args.n + args.n // 4
    rep = two_sided_tube_family(cl, ones, [p, p_swap], args.h)
    if args.stamp is not None:
        rep.meta["timestamp"] = args.stamp
    rep.summary["kappa_floor"] = 0.05
    rep.summary["kappa_ok"] = bool(rep.summary["kappa"] >= 0.05)
    return rep


def _cmd_cutoff_disk(args):
    dk = flat_disk(64, disk_rings_for_cutoff(args.t))
    e = cutoff_energy(build_cutoff(dk, 0, args.t))
    ref = 2.0 * math.pi / (-math.log(args.t))
    rows = [{"t": args.t, "area": abs(e / ref - 1.0), "energy": e, "reference": ref}]
    return make_report(
        "cutoff-disk",
        {"t": args.t, "tolerance": 1e-6},
        rows,
        1e-6,
        stamp=args.stamp,
    )


def _cmd_cutoff_torus(args):
    cl = clifford_torus(args.n)
    n = cl.aux["grid_n"]
    center = (n // 2) * n + n // 2
    dist = geodesic_distances(cl, center)
    d_const = 2.0 * max(
        level_set_perimeter(cl, dist, lam) / lam for lam in (0.2, 0.3, 0.5, 0.8)
    )
    e = cutoff_energy(build_cutoff(cl, center, args.t))
    bound = d_const / (-math.log(args.t))
    rows = [
        {
            "t": args.t,
            "area": e / bound,
            "energy": e,
            "bound_value": bound,
            "d_constant": d_const,
        }
    ]
    return make_report(
        "cutoff-torus", {"t": args.t, "n": args.n}, rows, 1.0, stamp=args.stamp
    )


def _cmd_doubling_sweep(args):
    schedule = None
    if args.epsilon is not None or args.delta is not None:
        schedule = default_schedule(
            epsilon=args.epsilon if args.epsilon is not None else 0.015,
            delta=args.delta if args.delta is not None else 0.22,
        )
    rep = assemble_doubled_sweepout(args.m, schedule=schedule, n=args.n)
    if args.stamp is not None:
        rep.meta["timestamp"] = args.stamp
    return rep


def _cmd_neck_fit(args):
    slope = cost_exponent_fit(args.n)
    rows = [
        {
            "t": float(args.n),
            "area": abs(slope - float(args.n)),
            "exponent": slope,
            "target": float(args.n),
        }
    ]
    return make_report(
        "neck-fit",
        {"n": args.n, "tolerance": 0.01},
        rows,
        0.01,
        stamp=args.stamp,
    )


def _emit(rep, args):
    text = report_to_csv(rep) if args.csv else report_to_json(rep)
    if args.out:
        write_atomic(args.out, text)
    if args.json or args.csv:
        sys.stdout.write(text)
    else:
        s = rep.summary
        sys.stdout.write(
            "command: %s\nrows: %d  sup: %.17g  budget: %.17g  margin: %.17g\nresult: %s\n"
            % (
                rep.meta["command"],
                len(rep.rows),
                s["sup_area"],
                s["budget"],
                s["margin"],
                "PASS" if s["passed"] else "FAIL",
            )
        )


def _verify_all(args):
    results = acceptance.run_all()
    for res in results:
        sys.stdout.write(res.line() + "\n")
    n_fail = sum(1 for res in results if not res.ok)
    sys.stdout.write(
        "%d/%d criteria passed\n" % (len(results) - n_fail, len(results))
    )
    return 2 if n_fail else 0


def _add_output_flags(p):
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    p.add_argument("--csv", action="store_true", help="emit CSV instead of JSON")
    p.add_argument("--out", help="write the report to this path atomically")
    p.add_argument("--stamp", help="timestamp string for the report metadata")


def build_parser():
    parser = _Parser(prog="catsweep", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    cat = subs.add_parser("catenoid", help="catenoid solve/scan")
    cat_sub = cat.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = cat_sub.add_parser("solve", help="solve the two-ring problem at one (r, h)")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_catenoid_solve)
    p = cat_sub.add_parser("scan", help="verify the area bound over the halving grid")
    p.add_argument("--r", type=float, default=1.0)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_catenoid_scan)

    wid = subs.add_parser("width", help="sweepout width computations")
    wid_sub = wid.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = wid_sub.add_parser("run", help="mountain-pass width vs the closed form")
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--tolerance", type=float, default=5e-3)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_width_run)
    p = wid_sub.add_parser("excess", help="naive vs optimal excess scaling slope")
    p.add_argument("--r", type=float, default=1.0)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_width_excess)

    fer = subs.add_parser("fermi", help="normal-graph expansions on the middle torus")
    fer_sub = fer.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = fer_sub.add_parser("quad", help="quadratic area coefficient check")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--step", type=float, default=0.05)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_fermi_quad)
    p = fer_sub.add_parser("tubes", help="two-sided tube family with one puncture pair")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--h", type=float, default=0.05)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_fermi_tubes)

    cut = subs.add_parser("cutoff", help="log-cutoff energies")
    cut_sub = cut.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = cut_sub.add_parser("disk", help="flat-disk energy vs the closed form")
    p.add_argument("--t", type=float, required=True)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_cutoff_disk)
    p = cut_sub.add_parser("torus", help="middle-torus energy vs the fitted bound")
    p.add_argument("--t", type=float, default=0.05)
    p.add_argument("--n", type=int, default=64)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_cutoff_torus)

    dbl = subs.add_parser("doubling", help="equivariant doubled sweepout")
    dbl_sub = dbl.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = dbl_sub.add_parser("sweep", help="assemble the family and check the budget")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_doubling_sweep)

    nek = subs.add_parser("neck", help="higher-dimensional neck cost scaling")
    nek_sub = nek.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = nek_sub.add_parser("fit", help="fit the cost exponent for one dimension")
    p.add_argument("--n", type=int, required=True)
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_neck_fit)

    p = subs.add_parser("verify-all", help="run the whole verification battery")
    p.set_defaults(handler=None, verify=True)

    return parser


def run(argv):
    args = build_parser().parse_args(argv)
    if getattr(args, "verify", False):
        return _verify_all(args)
    try:
        rep = args.handler(args)
    except (BudgetViolated, NonConvergence, SolverFailure) as exc:
        sys.stderr.write("verification failure: %s\n" % exc)
        return 2
    except CatsweepError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 1
    except OSError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 1
    try:
        _emit(rep, args)
    except OSError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 1
    extra_ok = rep.summary.get("kappa_ok", True)
    return 0 if (rep.summary["passed"] and extra_ok) else 2


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
