"""Command-line entry point (``dpp``).

Exit codes: 0 success, 2 validation error, 3 runtime error, 4 too many failed
experiment samples.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction

from . import __version__
from .baselines import DeceptivePathQuery, default_horizon, solve_deceptive_detailed
from .defender import DEFENDERS, SigmaStar, defender_from_name
from .equilibrium import MixedAttackerStrategy, belief_trace, solve
from .errors import DPPError, InputError, ScenarioError
from .evaluate import outcome, records_to_csv_rows, simulate
from .experiment import ATTACKERS, ExperimentConfig, rows_to_csv, run_experiment
from .graphcore import GridSpec, Trajectory, gen_grid
from .numeric import fmt, to_number
from .scenario import Scenario, canonicalize, check, scenario_from_dict, scenario_to_dict

logger = logging.getLogger("deceptive_pbne")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME, EXIT_PARTIAL = 0, 2, 3, 4
FAILURE_THRESHOLD = 0.01


def _json_default(obj):
    if isinstance(obj, Fraction):
        return float(obj)
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def read_scenario(path: str) -> Scenario:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return check(scenario_from_dict(data))
    except ScenarioError as exc:
        raise ScenarioError([f"{path}: {d}" for d in exc.diagnostics]) from None
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _path_json(scenario: Scenario, traj: Trajectory) -> dict:
    out = {"nodes": traj.to_list(), "weight": traj.total_weight}
    if scenario.graph.labels is not None:
        out["cells"] = [list(scenario.graph.label(v)) for v in traj.nodes]
    return out


def solve_report(scenario: Scenario) -> dict:
    eq = solve(scenario)
    res = outcome(SigmaStar(), eq.strategy, scenario)
    probs = SigmaStar().allocations(scenario, eq.xi2.path)
    trace = []
    for t, b in enumerate(belief_trace(eq.strategy, scenario.prior, eq.xi2.path)):
        trace.append({
            "t": t,
            "node": eq.xi2.path.nodes[t],
            "phase": eq.phases.phase_of(t),
            "sigma_star_primary": probs[t - 1] if t else None,
            "belief_primary": None if b is None else b.b1,
        })
    cont = eq.continuation
    return {
        "goals": {"primary": scenario.goal_primary, "secondary": scenario.goal_secondary,
                  "relabeled": scenario.swapped},
        "start": scenario.start,
        "prior": list(scenario.prior),
        "xi2": {**_path_json(scenario, eq.xi2.path), "secondary_cost": eq.xi2.secondary_cost},
        "phases": {"t_I": eq.phases.t_I, "t_II": eq.phases.t_II, "T": eq.phases.T},
        "xi1_I": _path_json(scenario, eq.xi1_I),
        "xi1_II": _path_json(scenario, eq.xi1_II),
        "terminal_continuation": None if cont is None else _path_json(scenario, cont),
        "mixing": {"p_I": eq.mixing[0], "p_II": eq.mixing[1], "exact": [fmt(p) for p in eq.mixing]},
        "costs": res.as_dict(),
        "belief_trace": trace,
    }


def _trace_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "node", "phase", "sigma_star_primary", "belief_primary"])
    for row in report["belief_trace"]:
        w.writerow([row["t"], row["node"], row["phase"],
                    "" if row["sigma_star_primary"] is None else float(row["sigma_star_primary"]),
                    "" if row["belief_primary"] is None else float(row["belief_primary"])])
    return buf.getvalue()


def cmd_solve(args) -> int:
    report = solve_report(read_scenario(args.scenario))
    _emit(_trace_csv(report) if args.format == "csv" else _dump(report), args.output)
    return EXIT_OK


def _attacker(scenario: Scenario, name: str, horizon=None) -> MixedAttackerStrategy:
    if name == "equilibrium":
        return solve(scenario).strategy
    h = default_horizon(scenario) if horizon is None else horizon
    paths = [solve_deceptive_detailed(scenario, DeceptivePathQuery(th, h, name)).path for th in (1, 2)]
    return MixedAttackerStrategy.pure(*paths)


def cmd_simulate(args) -> int:
    scenario = read_scenario(args.scenario)
    defender = defender_from_name(args.defender)
    attacker = _attacker(scenario, args.attacker)
    want_records = args.format == "csv" or args.records is not None
    sim = simulate(defender, attacker, scenario, args.rollouts, seed=args.seed, keep_records=want_records)
    if want_records:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["seed", "type", "path_len", "cost", "terminal_cost"])
        w.writerows(records_to_csv_rows(sim.records))
        if args.records:
            with open(args.records, "w", newline="") as fh:
                fh.write(buf.getvalue())
    if args.format == "csv":
        _emit(buf.getvalue(), args.output)
    else:
        exact = outcome(defender, attacker, scenario)
        _emit(_dump({"defender": args.defender, "attacker": args.attacker, "seed": args.seed,
                     "empirical": sim.outcome.as_dict(), "exact": exact.as_dict()}), args.output)
    return EXIT_OK


def cmd_baseline(args) -> int:
    scenario = read_scenario(args.scenario)
    horizon = default_horizon(scenario) if args.horizon is None else to_number(args.horizon)
    res = solve_deceptive_detailed(scenario, DeceptivePathQuery(args.type, horizon, args.objective))
    report = {"objective": args.objective, "type": args.type, "horizon": horizon,
              "path": _path_json(scenario, res.path), "objective_value": res.objective_value,
              "simple": res.simple, "binned": res.binned}
    _emit(_dump(report), args.output)
    return EXIT_OK


def cmd_gen_grid(args) -> int:
    spec = GridSpec(args.rows, args.cols, args.density, tuple(args.start), tuple(args.goal1),
                    tuple(args.goal2), args.seed)
    graph = gen_grid(spec, max_attempts=args.max_attempts)
    goals = [graph.index_of(tuple(args.goal1)), graph.index_of(tuple(args.goal2))]
    scenario = check(canonicalize(graph, goals, graph.index_of(tuple(args.start)), args.prior))
    data = scenario_to_dict(scenario)
    data["seed"] = args.seed
    _emit(_dump(data), args.output)
    return EXIT_OK


def cmd_experiment(args) -> int:
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    for key in ("rows", "cols", "samples", "densities", "horizon_multiplier"):
        val = getattr(args, key)
        if val is not None:
            base[key] = val
    base["base_seed"] = args.seed if args.seed is not None else base.get("base_seed", 0)
    config = ExperimentConfig.from_dict(base)
    rows, summary = run_experiment(config, workers=args.workers)
    text = rows_to_csv(rows)
    if args.format == "json":
        _emit(_dump({"summary": summary, "rows": [r.__dict__ for r in rows]}), args.output)
    else:
        _emit(text, args.output)
        if args.summary:
            with open(args.summary, "w") as fh:
                fh.write(_dump(summary))
        elif args.output:
            stem = args.output[:-4] if args.output.endswith(".csv") else args.output
            with open(stem + ".summary.json", "w") as fh:
                fh.write(_dump(summary))
        else:
            sys.stderr.write(_dump(summary))
    if summary["failure_rate"] > FAILURE_THRESHOLD:
        logger.error("%d of %d samples failed", summary["failures"], summary["samples_total"])
        return EXIT_PARTIAL
    return EXIT_OK


def _density(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 <= x <= 0.5:
        raise argparse.ArgumentTypeError(f"density {x} outside [0, 0.5]")
    return x


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=d(None), help="random seed")
    parser.add_argument("--output", "-o", default=d(None), help="write the result here instead of stdout")
    parser.add_argument("--format", choices=["json", "csv"], default=d(None))
    parser.add_argument("--workers", type=int, default=d(1), help="worker processes for experiments")
    parser.add_argument("-v", "--verbose", action="count", default=d(0))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="compute the equilibrium for a scenario file")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo rollouts of a strategy pair")
    p.add_argument("scenario")
    p.add_argument("--rollouts", "-n", type=int, default=10_000)
    p.add_argument("--defender", choices=sorted(DEFENDERS), default="sigma_star")
    p.add_argument("--attacker", choices=ATTACKERS, default="equilibrium")
    p.add_argument("--records", help="also write per-rollout CSV to this path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("baseline", parents=[common], help="exaggeration or ambiguity path")
    p.add_argument("scenario")
    p.add_argument("--objective", choices=["exaggeration", "ambiguity"], required=True)
    p.add_argument("--type", type=int, choices=[1, 2], required=True)
    p.add_argument("--horizon", help="maximum path weight (default: 3x the larger goal distance)")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("gen-grid", parents=[common], help="random grid-world scenario")
    p.add_argument("--rows", type=int, default=20)
    p.add_argument("--cols", type=int, default=20)
    p.add_argument("--density", type=_density, default=0.0)
    p.add_argument("--start", type=int, nargs=2, metavar=("ROW", "COL"))
    p.add_argument("--goal1", type=int, nargs=2, metavar=("ROW", "COL"))
    p.add_argument("--goal2", type=int, nargs=2, metavar=("ROW", "COL"))
    p.add_argument("--prior", type=float, nargs=2, default=[0.6, 0.4], metavar=("P1", "P2"))
    p.add_argument("--max-attempts", type=int, default=1000)
    p.set_defaults(func=cmd_gen_grid)

    p = sub.add_parser("experiment", parents=[common], help="obstacle-density sweep")
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--densities", type=_density, nargs="+")
    p.add_argument("--horizon-multiplier", type=float)
    p.add_argument("--summary", help="summary JSON path")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    if args.command == "gen-grid":
        if args.seed is None:
            args.seed = 0
        r, c = args.rows, args.cols
        args.start = args.start or [r // 2, 0]
        args.goal1 = args.goal1 or [0, c - 1]
        args.goal2 = args.goal2 or [r - 1, c - 1]
    elif args.command == "simulate" and args.seed is None:
        args.seed = 0
    try:
        return args.func(args)
    except (InputError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DPPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        logger.debug("unhandled", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
