"""Command line: gen, solve, verify, render, experiment."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from . import pslg as pslg_mod
from .experiment import ExperimentError, RampConfig, run_experiment, write_outputs
from .pslg import PslgError
from .render import render_svg
from .solver import VARIANTS, SolverConfig, SolverError, load_solution, save_solution, solve
from .tessgen import TessGenConfig, TessGenError, generate_with_header
from .verify import (BRUTE_FORCE_CAP, VerifyError, brute_force_voronoi, edge_coverage_check,
                     exact_guard_check, reports_to_json, sampled_nearest_pair_check, verification_box)


class CliError(Exception):
    pass


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {s}")
    return v


def cmd_gen(args) -> int:
    cfg = TessGenConfig(args.seed, args.points, args.edge_attempts, box=tuple(args.box),
                        min_angle_deg=args.min_angle)
    g, header = generate_with_header(cfg)
    pslg_mod.save(g, args.out, header=header)
    print(f"vertices={g.n_vertices} edges={g.n_edges} regions={g.n_regions}")
    return 0


def cmd_solve(args) -> int:
    g = pslg_mod.load(args.input)
    cfg = SolverConfig(variant=args.variant, safety=args.safety, tol=args.tol, epsilon_override=args.epsilon)
    sol = solve(g, cfg)
    save_solution(sol, args.out)
    c = sol.report.counts
    print(f"variant={cfg.variant} sites={len(sol.sites)} pairs={c['pairs']} "
          f"inner_circles={c['inner_circles']} epsilon={sol.report.epsilon:.9g}")
    return 0


def cmd_verify(args) -> int:
    g = pslg_mod.load(args.pslg)
    sol = load_solution(g, args.solution)
    modes = ["certificate", "sampled", "bruteforce"] if args.mode == "all" else [args.mode]
    if args.mode == "bruteforce" and len(sol.sites) > BRUTE_FORCE_CAP:
        raise CliError(f"{len(sol.sites)} sites exceed the brute-force cap of {BRUTE_FORCE_CAP}; "
                       f"use --mode certificate or --mode sampled")
    reports = []
    for mode in modes:
        if mode == "certificate":
            reports.append(exact_guard_check(g, sol))
        elif mode == "sampled":
            reports.append(sampled_nearest_pair_check(g, sol, args.samples))
        elif len(sol.sites) <= BRUTE_FORCE_CAP:
            vd = brute_force_voronoi(sol.sites, verification_box(g, sol.sites))
            reports.append(edge_coverage_check(g, vd, 1e-6 * g.diagonal()))
        else:
            print(f"bruteforce: skipped ({len(sol.sites)} sites exceed the cap of {BRUTE_FORCE_CAP})")
    for r in reports:
        print(r.summary())
    if args.report:
        Path(args.report).write_text(reports_to_json(reports))
    return 0 if all(r.ok for r in reports) else 1


def cmd_render(args) -> int:
    g = pslg_mod.load(args.pslg)
    sol = load_solution(g, args.solution) if args.solution else None
    vd = None
    if args.diagram:
        if sol is None:
            raise CliError("--diagram needs --solution")
        if 0 < len(sol.sites) <= BRUTE_FORCE_CAP:
            vd = brute_force_voronoi(sol.sites, verification_box(g, sol.sites))
    Path(args.out).write_text(render_svg(g, sol, vd))
    return 0


def cmd_experiment(args) -> int:
    cfg = RampConfig(args.runs, args.seed, points=tuple(args.points), attempts=tuple(args.attempts),
                     safety=args.safety)
    records = run_experiment(cfg, jobs=args.jobs)
    res = write_outputs(records, args.csv, ddof=args.ddof)
    print(f"runs={len(records)} csv={args.csv}")
    if res:
        corr = res["correlations"]
        for k in ("alpha_vs_edges", "epsilon_vs_edges", "alpha_vs_epsilon"):
            v = corr[k]
            print(f"corr {k}: {'n/a' if v is None else f'{v:.4f}'}")
        for variant, fit in res["regressions"].items():
            if fit:
                print(f"fit {variant}: sites = {fit['slope']:.4f} * edges + {fit['intercept']:.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="givp", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", help="generate a random tesselation")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--points", type=int, default=50)
    s.add_argument("--edge-attempts", type=int, default=70)
    s.add_argument("--box", type=float, nargs=4, default=[0.0, 0.0, 1000.0, 1000.0],
                   metavar=("X0", "Y0", "X1", "Y1"))
    s.add_argument("--min-angle", type=float, default=10.0, help="rejection threshold in degrees")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="place sentinel sites")
    s.add_argument("input")
    s.add_argument("--variant", default="sequential", help=f"one of {{{', '.join(VARIANTS)}}}")
    s.add_argument("--safety", type=float, default=0.995)
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--epsilon", type=float, default=None, help="use this epsilon instead of the derived one")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("verify", help="check a solution; exit 0 iff every check passes")
    s.add_argument("pslg")
    s.add_argument("solution")
    s.add_argument("--mode", choices=["certificate", "bruteforce", "sampled", "all"], default="certificate")
    s.add_argument("--samples", type=int, default=8, help="probes per stretch in sampled mode")
    s.add_argument("--report", help="write a JSON report here")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("render", help="draw graph, circles and sites as SVG")
    s.add_argument("pslg")
    s.add_argument("--solution")
    s.add_argument("--diagram", action="store_true", help="overlay the Voronoi diagram of the sites")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("experiment", help="batch of generated instances with summary statistics")
    s.add_argument("--runs", type=_positive_int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--points", type=int, nargs=2, default=[15, 175], metavar=("FIRST", "LAST"))
    s.add_argument("--attempts", type=int, nargs=2, default=[30, 250], metavar=("FIRST", "LAST"))
    s.add_argument("--safety", type=float, default=0.995)
    s.add_argument("--ddof", type=int, choices=[0, 1], default=1, help="standard deviation divisor n - ddof")
    s.add_argument("--jobs", type=_positive_int, default=1)
    s.add_argument("--csv", required=True)
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, PslgError, SolverError, VerifyError, TessGenError, ExperimentError, OSError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
