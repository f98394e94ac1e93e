"""Experiment driver.

Subcommands: solve, omega, diam-sweep, certify, perturb, equation-probe,
contact-study, illposed-demo.  Every run emits one CSV (deterministic for a
fixed seed) and optionally a static SVG plot.  Exit code 0 means the run
passed its verdicts, 2 flags a mathematically interesting finding
(ill-posedness, non-uniqueness, suspect continuity), 1 is a tool error.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

import numpy as np

from . import __version__, svgplot
from .errors import SolverFailure, VhiError
from .perturb import f_only_schedule, perturbation_experiment, solution_map_probe
from .problem import VhiProblem, smallness_margin
from .registry import (MODEL_PRESETS, PROBLEM_PRESETS, build_problem,
                       dump_config, load_config, model_from_config,
                       problem_from_config)
from .report import write_csv
from .solvers import (EquationOperator, equation_wellposed_probe,
                      solve_1d_grid, solve_strongly_monotone)
from .space import as_vector
from .wellposed import certify_error, diam_sweep, omega_diameter

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FINDING = 2


def _parse_eps_range(text: str) -> List[float]:
    """'1e-1:1e-4' -> [1e-1, 1e-2, 1e-3, 1e-4]; a single value stands alone;
    comma lists pass through."""
    if "," in text:
        return [float(t) for t in text.split(",")]
    if ":" not in text:
        return [float(text)]
    hi, lo = (float(t) for t in text.split(":"))
    if hi < lo:
        hi, lo = lo, hi
    out = []
    e = hi
    while e >= lo * (1 - 1e-12):
        out.append(e)
        e /= 10.0
    return out


def _load_problem(args) -> VhiProblem:
    if getattr(args, "config", None):
        return problem_from_config(load_config(args.config))
    name = args.problem
    if name is None:
        raise VhiError("no problem given (positional name or --config)")
    params = {}
    if getattr(args, "f", None) is not None:
        params["f"] = args.f
    return build_problem(name, **params)


def _config_echo(args) -> dict:
    skip = {"func", "out", "svg"}
    return {k: v for k, v in sorted(vars(args).items())
            if k not in skip and v is not None and not callable(v)}


def _solver_for(problem: VhiProblem):
    margin = smallness_margin(problem)
    if margin is not None and margin > 0:
        return lambda p: solve_strongly_monotone(p, tol=1e-10).solutions[0]
    if problem.dim == 1:
        return lambda p: solve_1d_grid(p, step=1e-4).solutions[0]
    raise VhiError("no solver available for this problem")


# --------------------------------------------------------------------------
# subcommand handlers

def _cmd_solve(args) -> int:
    problem = _load_problem(args)
    if args.grid or (args.method == "grid") or \
            (args.method == "auto" and problem.dim == 1):
        lo, hi, step = (-10.0, 10.0, 1e-4)
        if args.grid:
            lo, hi, step = (float(t) for t in args.grid.split(":"))
        report = solve_1d_grid(problem, lo=lo, hi=hi, step=step)
    else:
        report = solve_strongly_monotone(problem, tol=args.tol)
    rows = []
    for sol, res in zip(report.solutions, report.residuals):
        rows.append(["point", ";".join(repr(float(x)) for x in sol), res])
    for lo_i, hi_i in report.intervals:
        rows.append(["interval", f"{lo_i!r};{hi_i!r}", 0.0])
    write_csv(args.out, ["kind", "coords", "residual"], rows,
              config=_config_echo(args), seed=args.seed)
    print(f"{report.method}: {len(report.solutions)} point(s), "
          f"{len(report.intervals)} interval(s) -> {args.out}")
    # an empty solution set is the diagnostic finding here; multiplicity
    # verdicts belong to diam-sweep
    return EXIT_OK if report.converged else EXIT_FINDING


def _cmd_omega(args) -> int:
    problem = _load_problem(args)
    est = omega_diameter(problem, args.eps)
    status = "EMPTY" if est.empty else "NONEMPTY"
    rows = [[est.epsilon, len(est.members), est.diameter_lower,
             est.diameter_upper, status]]
    write_csv(args.out, ["epsilon", "members_found", "diameter_lower",
                         "diameter_upper", "verdict"], rows,
              config=_config_echo(args), seed=args.seed)
    print(f"Omega({args.eps:g}): {len(est.members)} members, "
          f"diameter >= {est.diameter_lower!r} -> {args.out}")
    return EXIT_FINDING if est.empty else EXIT_OK


def _cmd_diam_sweep(args) -> int:
    problem = _load_problem(args)
    eps = _parse_eps_range(args.eps)
    result = diam_sweep(problem, eps, tol=args.tol)
    rows = [[r.epsilon, r.members_found, r.diameter_lower, r.diameter_upper,
             result.verdict] for r in result.rows]
    write_csv(args.out, ["epsilon", "members_found", "diameter_lower",
                         "diameter_upper", "verdict"], rows,
              config=_config_echo(args), seed=args.seed)
    if args.svg:
        svgplot.line_plot(args.svg, [r.epsilon for r in result.rows],
                          [max(r.diameter, 1e-18) for r in result.rows],
                          title=f"diameter vs eps [{problem.name}]",
                          xlabel="eps", ylabel="diam", log_x=True, log_y=True)
    print(f"sweep limit {result.limit!r}, verdict {result.verdict} -> {args.out}")
    return EXIT_OK if result.well_posed else EXIT_FINDING


def _cmd_certify(args) -> int:
    problem = _load_problem(args)
    bound = certify_error(problem, args.eps)
    margin = smallness_margin(problem)
    write_csv(args.out, ["epsilon", "margin", "bound"],
              [[args.eps, margin, bound]],
              config=_config_echo(args), seed=args.seed)
    print(f"any point of Omega({args.eps:g}) lies within {bound!r} of the "
          f"solution (margin {margin!r}) -> {args.out}")
    return EXIT_OK


def _cmd_perturb(args) -> int:
    problem = _load_problem(args)
    solver = _solver_for(problem)
    deltas = [2.0 ** -(n + 1) for n in range(args.steps)]
    f_seq = []
    for d in deltas:
        fn = problem.f.copy()
        fn[0] += d
        f_seq.append(fn)
    schedule = f_only_schedule(problem, f_seq)
    table = perturbation_experiment(schedule, solver,
                                    verify_pairs=args.verify_pairs)
    rows = [[r.n, r.b_n, r.c_n, r.df_n, r.eps_n, r.error, r.bound, r.passed]
            for r in table.rows]
    write_csv(args.out, ["n", "b_n", "c_n", "df_n", "eps_n", "error",
                         "bound", "pass"], rows,
              config=_config_echo(args), seed=args.seed)
    if args.svg:
        svgplot.line_plot(args.svg, [r.n + 1 for r in table.rows],
                          [max(r.error, 1e-18) for r in table.rows],
                          title=f"perturbation error [{problem.name}]",
                          xlabel="step", ylabel="error", log_y=True)
    print(f"perturbation experiment {'PASS' if table.passed else 'FAIL'} "
          f"-> {args.out}")
    return EXIT_OK if table.passed else EXIT_FINDING


def _cmd_equation_probe(args) -> int:
    problem = _load_problem(args)
    op = EquationOperator(
        T=lambda u, _p=problem: as_vector(_p.A.apply(u))
        + (as_vector(_p.j.subgradient(u)) if _p.j.subgradient else 0.0),
        name=problem.name)
    f_values = [np.array([float(t)]) for t in args.f_values.split(",")]
    report = equation_wellposed_probe(op, f_values, delta=args.delta)
    rows = [[float(r.f[0]), r.solved, r.modulus, r.interval_found, r.suspect]
            for r in report.rows]
    write_csv(args.out, ["f", "solved", "modulus", "interval_found",
                         "suspect"], rows,
              config=_config_echo(args), seed=args.seed)
    print(f"equation probe {'SUSPECT' if report.suspect else 'OK'} -> {args.out}")
    return EXIT_FINDING if report.suspect else EXIT_OK


def _cmd_contact_study(args) -> int:
    from .contact import assemble, contact_convergence_study, gap_schedule, load_schedule
    if args.config:
        model = model_from_config(load_config(args.config)["contact"])
    else:
        model = MODEL_PRESETS["contact3"]()
    solver = lambda p: solve_strongly_monotone(p, tol=1e-10).solutions[0]  # noqa: E731
    if args.schedule == "gap":
        g_seq = [model.g + 2.0 ** -(n + 1) * min(1.0, float(np.min(model.k - model.g)))
                 for n in range(args.steps)]
        schedule = gap_schedule(model, g_seq)
    else:
        f0_seq = [model.f0 + 2.0 ** -(n + 1) for n in range(args.steps)]
        schedule = load_schedule(model, f0_seq)
    table = contact_convergence_study(model, schedule, solver)
    rows = [[r.n, r.b_n, r.c_n, r.df_n, r.eps_n, r.error, r.bound, r.passed]
            for r in table.rows]
    write_csv(args.out, ["n", "b_n", "c_n", "df_n", "eps_n", "error",
                         "bound", "pass"], rows,
              config=_config_echo(args), seed=args.seed)
    print(f"contact study {'PASS' if table.passed else 'FAIL'} -> {args.out}")
    return EXIT_OK if table.passed else EXIT_FINDING


def _cmd_illposed_demo(args) -> int:
    from .contact import assemble, illposed_witness
    if args.config:
        model = model_from_config(load_config(args.config)["contact"])
    else:
        model = MODEL_PRESETS["contact_illposed"]()
    try:
        witness = illposed_witness(model, budget=args.budget, seed=args.seed)
    except SolverFailure as exc:
        print(f"no witness: {exc}")
        return EXIT_ERROR
    rows = [[";".join(repr(float(x)) for x in p), r]
            for p, r in zip(witness.points, witness.residuals)]
    write_csv(args.out, ["point", "residual"], rows,
              config=_config_echo(args), seed=args.seed)
    print(f"{witness.count} distinct zero-defect points -> {args.out} "
          "(problem is NOT well-posed)")
    return EXIT_FINDING


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="vhiwell",
        description="solve and diagnose variational-hemivariational "
                    "inequalities on R^n")
    ap.add_argument("--version", action="version", version=f"vhiwell {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, problem_arg=True):
        if problem_arg:
            p.add_argument("problem", nargs="?", default=None,
                           metavar="PROBLEM",
                           help="registry problem name "
                                f"({', '.join(sorted(PROBLEM_PRESETS))})")
            p.add_argument("--problem", dest="problem_flag", default=None,
                           help=argparse.SUPPRESS)
            p.add_argument("--f", type=float, default=None,
                           help="load parameter of the preset")
            p.add_argument("--config", default=None, help="problem config JSON")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output CSV path")
        p.add_argument("--svg", default=None, help="optional SVG plot path")

    p = sub.add_parser("solve", help="compute the solution set")
    common(p)
    p.add_argument("--grid", default=None, help="lo:hi:step for the 1-D scan")
    p.add_argument("--method", choices=["auto", "grid", "monotone"],
                   default="auto")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=_cmd_solve, default_out="solve.csv")

    p = sub.add_parser("omega", help="probe one slack set")
    common(p)
    p.add_argument("--eps", type=float, required=True)
    p.set_defaults(func=_cmd_omega, default_out="omega.csv")

    p = sub.add_parser("diam-sweep", help="diameter sweep and verdict")
    common(p)
    p.add_argument("--eps", default="1e-1:1e-4",
                   help="range hi:lo (log steps) or comma list")
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=_cmd_diam_sweep, default_out="diam_sweep.csv")

    p = sub.add_parser("certify", help="residual-to-error certificate")
    common(p)
    p.add_argument("--eps", type=float, required=True)
    p.set_defaults(func=_cmd_certify, default_out="certify.csv")

    p = sub.add_parser("perturb", help="load-perturbation experiment")
    common(p)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--verify-pairs", type=int, default=200)
    p.set_defaults(func=_cmd_perturb, default_out="perturb.csv")

    p = sub.add_parser("equation-probe",
                       help="continuity probe of the equation route")
    common(p)
    p.add_argument("--f-values", default="1.0,1.9,2.1,3.0")
    p.add_argument("--delta", type=float, default=1e-4)
    p.set_defaults(func=_cmd_equation_probe, default_out="equation_probe.csv")

    p = sub.add_parser("contact-study", help="contact convergence study")
    common(p, problem_arg=False)
    p.add_argument("--config", default=None, help="contact model JSON")
    p.add_argument("--schedule", choices=["gap", "load"], default="gap")
    p.add_argument("--steps", type=int, default=8)
    p.set_defaults(func=_cmd_contact_study, default_out="contact_study.csv")

    p = sub.add_parser("illposed-demo", help="non-uniqueness witness")
    common(p, problem_arg=False)
    p.add_argument("--config", default=None, help="contact model JSON")
    p.add_argument("--budget", type=int, default=200)
    p.set_defaults(func=_cmd_illposed_demo, default_out="illposed.csv")

    return ap


_VALUE_FLAGS = {"--grid", "--eps", "--f", "--f-values"}


def _merge_dashed_values(argv: List[str]) -> List[str]:
    # let values like "-10:10:1e-4" follow their flag without argparse
    # mistaking them for options
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and \
                argv[i + 1].startswith("-") and len(argv[i + 1]) > 1 \
                and argv[i + 1][1].isdigit():
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv: Optional[List[str]] = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    args = build_parser().parse_args(_merge_dashed_values(list(argv)))
    if getattr(args, "problem_flag", None) and not args.problem:
        args.problem = args.problem_flag
    if args.out is None:
        args.out = args.default_out
    try:
        return args.func(args)
    except (VhiError, SolverFailure, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
