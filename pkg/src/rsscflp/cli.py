"""Command line: solve, generate, simulate, tradeoff, verify, bound.

Exit codes: 0 success, 1 infeasible instance or failed verification,
2 usage or input error, 3 time limit reached.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from .bnp import BranchAndPrice, SolverConfig, jsonl_tracer
from .instgen import GenSpec, generate
from .model import FormatError, StructuralError, compact_lp_bound, dumps, evaluate, load_instance, solution_from_dict, solution_to_dict
from .sim import SimSpec, evaluate_robustness, parse_range, rows_to_csv, sample_scenarios, tradeoff_grid

EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE, EXIT_TIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc


def _load(path):
    try:
        return load_instance(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except FormatError as exc:
        raise UsageError(str(exc)) from exc


def _load_solution(inst, path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: {exc}") from exc
    try:
        return solution_from_dict(inst, data)
    except FormatError as exc:
        raise UsageError(str(exc)) from exc


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        time_limit=args.time_limit,
        fixing=not args.no_fixing,
        fixing_period=args.fixing_period,
        early_termination=not args.no_early_termination,
        child_order=args.child_order,
        initial_pool=args.initial_pool,
        multi_column=args.multi_column,
    )


def _config_header(args, keys) -> dict:
    return {k: getattr(args, k) for k in keys}


SOLVER_KEYS = ("time_limit", "no_fixing", "fixing_period", "no_early_termination", "child_order", "initial_pool",
               "multi_column")


def _add_solver_flags(p) -> None:
    p.add_argument("--time-limit", type=float, default=3600.0)
    p.add_argument("--no-fixing", action="store_true", help="disable reduced-cost fixing")
    p.add_argument("--fixing-period", type=int, default=0, help="also fix every k tree levels (0: off)")
    p.add_argument("--no-early-termination", action="store_true")
    p.add_argument("--child-order", choices=("up", "down"), default="up")
    p.add_argument("--initial-pool", choices=("singletons", "dummy"), default="singletons")
    p.add_argument("--multi-column", action="store_true", help="add every improving l-subproblem column")


# -- commands -----------------------------------------------------------------------


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    cfg = _solver_config(args)
    trace_fh = None
    if args.trace:
        try:
            trace_fh = open(args.trace, "w")
        except OSError as exc:
            raise UsageError(f"cannot write {args.trace}: {exc}") from exc
        cfg.trace = jsonl_tracer(trace_fh)
    try:
        solver = BranchAndPrice(inst, cfg)
        rep = solver.solve()
    finally:
        if trace_fh is not None:
            trace_fh.close()
    out = solution_to_dict(
        rep.objective,
        rep.assignment,
        status=rep.status,
        stats=rep.stats(timings=args.timings),
        config=_config_header(args, SOLVER_KEYS),
        seed=inst.meta.get("seed"),
    )
    _write(args.out, dumps(out))
    if args.dump_lp:
        _write(args.dump_lp, solver.master.lp.dump())
    if args.dump_pool:
        _write(args.dump_pool, solver.master.pool_csv())
    if rep.status == "infeasible":
        print("instance is infeasible", file=sys.stderr)
        return EXIT_INFEASIBLE
    if rep.status != "optimal":
        print(f"stopped at {rep.status}: objective {rep.objective} bound {rep.bound:.4f}", file=sys.stderr)
        return EXIT_TIME
    return EXIT_OK


def cmd_generate(args) -> int:
    try:
        spec = GenSpec(
            scheme=args.scheme,
            m=args.m,
            n=args.n,
            target_ratio=args.ratio,
            seed=args.seed,
            gamma=args.gamma,
            sigma_range=(args.sigma_min, args.sigma_max),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _write(args.out, dumps(generate(spec).to_dict()))
    return EXIT_OK


def cmd_simulate(args) -> int:
    inst = _load(args.instance)
    _, assignment = _load_solution(inst, args.solution)
    try:
        if evaluate(inst, assignment).violations:
            print("warning: solution violates robust capacity", file=sys.stderr)
    except StructuralError as exc:
        raise UsageError(str(exc)) from exc
    deltas = parse_range(args.delta)
    lines = [f"# config: {json.dumps(_config_header(args, ('delta', 'scenarios', 'seed')))}\n",
             "delta,scenarios,infeasible,infeasibility_pct\n"]
    for delta in deltas:
        spec = SimSpec(delta, args.scenarios, args.seed)
        res = evaluate_robustness(inst, assignment, spec, sample_scenarios(inst, spec))
        lines.append(f"{delta:.4f},{res.scenarios},{res.infeasible},{res.infeasibility_pct:.4f}\n")
    _write(args.out, "".join(lines))
    return EXIT_OK


def cmd_tradeoff(args) -> int:
    inst = _load(args.instance)
    sigmas = [round(v * 1000) for v in parse_range(args.sigma)]
    gammas = [int(v) for v in parse_range(args.gamma)]
    deltas = parse_range(args.delta)
    cfg = _solver_config(args)
    try:
        rows, (slope, r2) = tradeoff_grid(inst, sigmas, gammas, deltas, SimSpec(0.0, args.scenarios, args.seed), cfg,
                                          common_numbers=not args.fresh_scenarios)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INFEASIBLE
    keys = ("sigma", "gamma", "delta", "scenarios", "seed", "fresh_scenarios", *SOLVER_KEYS)
    header = f"# config: {json.dumps(_config_header(args, keys))}\n"
    fit = f"# fit additional_capacity = {slope:.6f} * penalty_cost, R2 = {r2:.6f}\n"
    _write(args.out, header + rows_to_csv(rows) + fit)
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = _load(args.instance)
    claimed, assignment = _load_solution(inst, args.solution)
    try:
        ev = evaluate(inst, assignment)
    except StructuralError as exc:
        print(f"invalid: {exc}")
        return EXIT_INFEASIBLE
    if not ev.feasible:
        for i in ev.violations:
            print(f"violation: facility {i} worst-case load exceeds capacity {inst.capacity[i]}")
        return EXIT_INFEASIBLE
    if claimed is not None and claimed != ev.objective:
        print(f"objective mismatch: claimed {claimed}, evaluated {ev.objective}")
        return EXIT_INFEASIBLE
    print(f"ok objective {ev.objective}")
    return EXIT_OK


def cmd_bound(args) -> int:
    inst = _load(args.instance)
    rp2 = compact_lp_bound(inst).objective
    cfg = _solver_config(args)
    if args.solution:
        cfg.node_limit = 1
    rep = BranchAndPrice(inst, cfg).solve()
    ap = rep.root_bound if rep.root_converged else math.nan
    if args.solution:
        best, assignment = _load_solution(inst, args.solution)
        try:
            ev = evaluate(inst, assignment)
        except StructuralError as exc:
            raise UsageError(str(exc)) from exc
        best = ev.objective
    else:
        best = rep.objective
    out = {"Z_LP_AP": ap, "Z_LP_RP2": rp2, "Z_best": best, "status": rep.status}
    if best:
        out["gapBP"] = (best - ap) / best * 100
        out["gapLP"] = (best - rp2) / best * 100
    clean = {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in out.items()}
    _write(args.out, json.dumps(clean, indent=1) + "\n")
    if best is None:
        return EXIT_INFEASIBLE if rep.status == "infeasible" else EXIT_TIME
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rsscflp", description="Robust single-source CFLP by branch-and-price")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an instance to optimality")
    p.add_argument("--instance", required=True)
    p.add_argument("--out", default="-")
    _add_solver_flags(p)
    p.add_argument("--trace", help="write per-node records as JSON lines")
    p.add_argument("--dump-lp", help="write the final master LP")
    p.add_argument("--dump-pool", help="write the column pool as CSV")
    p.add_argument("--timings", action="store_true", help="include wall times in the solution file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("generate", help="generate a random instance")
    p.add_argument("--scheme", choices=("t3", "t4"), default="t3")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ratio", type=float, default=None, help="target total capacity / total demand")
    p.add_argument("--gamma", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma-min", type=int, default=100, help="per mille")
    p.add_argument("--sigma-max", type=int, default=500, help="per mille")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("simulate", help="Monte-Carlo infeasibility of a solution")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--delta", default="0:0.4:0.05")
    p.add_argument("--scenarios", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tradeoff", help="solve and simulate a sigma x gamma grid")
    p.add_argument("--instance", required=True)
    p.add_argument("--sigma", default="0:0.5:0.1")
    p.add_argument("--gamma", default="0:5:1")
    p.add_argument("--delta", default="0:0.4:0.05")
    p.add_argument("--scenarios", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fresh-scenarios", action="store_true", help="redraw scenarios per solution")
    p.add_argument("--out", default="-")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("verify", help="check a solution against an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bound", help="compare the column generation and compact LP bounds")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", help="take Z_best from this solution instead of solving")
    p.add_argument("--out", default="-")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_bound)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "time_limit", 1) <= 0:
        print("error: --time-limit must be positive", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "scenarios", 1) < 1:
        print("error: --scenarios must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
