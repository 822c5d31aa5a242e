"""Command-line entry point: solve, oracle, bench, and compare workflows.

Exit codes: 0 success, 1 usage/config error, 2 solver failure, 3 oracle
request too large.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (
    ConfigError,
    ExperimentConfig,
    aggregate,
    config_from_json,
    run_benchmark,
    write_csv,
)
from .model import Cap, Device, Instance, Task
from .oracle import OracleSizeError, solve_exact
from .rounding import RoundingOptions, run_algorithm1
from .sdp import STATUS_INFEASIBLE, STATUS_NUMERICAL, SdpSolverError

__all__ = ["main", "load_instance"]


def load_instance(path: str) -> Instance:
    """Read an instance JSON file; unknown or missing keys are rejected.

    Schema (SI base units)::

        {"device": {"r0", "p_comp", "p_tx", "p_rx", "jc", "ec"},
         "caps": [{"r", "c_ul", "c_dl"}, ...],
         "tasks": [{"alpha", "beta", "omega"}, ...],
         "lambda_t": ..., "lambda_e": ...}
    """
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"{path}: file not found") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc

    def strict(obj: dict, keys: set[str], context: str) -> dict:
        if not isinstance(obj, dict):
            raise ConfigError(f"{path}: {context} must be an object")
        unknown = set(obj) - keys
        if unknown:
            raise ConfigError(f"{path}: {context} has unknown key(s) {sorted(unknown)}")
        missing = keys - set(obj)
        if missing:
            raise ConfigError(f"{path}: {context} is missing key(s) {sorted(missing)}")
        return obj

    top = strict(payload, {"device", "caps", "tasks", "lambda_t", "lambda_e"}, "instance")
    dev = strict(top["device"], {"r0", "p_comp", "p_tx", "p_rx", "jc", "ec"}, "device")
    try:
        device = Device(**{k: float(v) for k, v in dev.items()})
        caps = tuple(
            Cap(**{k: float(v) for k, v in strict(c, {"r", "c_ul", "c_dl"}, f"caps[{i}]").items()})
            for i, c in enumerate(top["caps"])
        )
        tasks = tuple(
            Task(**{k: float(v) for k, v in strict(t, {"alpha", "beta", "omega"}, f"tasks[{i}]").items()})
            for i, t in enumerate(top["tasks"])
        )
        return Instance(device, caps, tasks, float(top["lambda_t"]), float(top["lambda_e"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1 on usage errors
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="edgeoffload", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one instance with the relaxation pipeline")
    p_solve.add_argument("--config", required=True, help="instance JSON file")
    p_solve.add_argument("--seed", type=int, default=0)
    p_solve.add_argument("--samples", type=int, default=100, help="Gaussian sample count")
    p_solve.add_argument("--refine-gamma", action="store_true")
    p_solve.add_argument("--no-column-candidate", action="store_true")
    p_solve.add_argument("--out", help="write the decision JSON here")
    p_solve.set_defaults(func=_cmd_solve)

    p_oracle = sub.add_parser("oracle", help="solve one instance exactly by enumeration")
    p_oracle.add_argument("--config", required=True)
    p_oracle.add_argument("--max-assignments", type=float, default=2e6)
    p_oracle.add_argument("--out")
    p_oracle.set_defaults(func=_cmd_oracle)

    p_bench = sub.add_parser("bench", help="run the rate-regime benchmark, emit CSV")
    p_bench.add_argument("--config", help="experiment config JSON (flags below override)")
    p_bench.add_argument("--rates", choices=("low", "mid", "high"))
    p_bench.add_argument("--n-min", type=int, default=1)
    p_bench.add_argument("--n-max", type=int, default=10)
    p_bench.add_argument("--realizations", type=int, default=50)
    p_bench.add_argument("--seed", type=int, required=True)
    p_bench.add_argument("--samples", type=int, default=100)
    p_bench.add_argument("--oracle-limit", type=int, default=1000)
    p_bench.add_argument("--no-refine-gamma", action="store_true")
    p_bench.add_argument("--timing", action="store_true", help="record wall-clock columns")
    p_bench.add_argument("--out", required=True, help="CSV output path")
    p_bench.set_defaults(func=_cmd_bench)

    p_cmp = sub.add_parser("compare", help="relaxation pipeline vs. exact oracle on one instance")
    p_cmp.add_argument("--config", required=True)
    p_cmp.add_argument("--seed", type=int, default=0)
    p_cmp.add_argument("--samples", type=int, default=100)
    p_cmp.add_argument("--max-assignments", type=float, default=2e6)
    p_cmp.set_defaults(func=_cmd_compare)
    return parser


def _decision_payload(report) -> dict:
    bd = report.breakdown
    return {
        "cpu_of": list(report.decision.assignment.cpu_of),
        "gamma": report.gamma,
        "psi": report.psi,
        "latency_s": bd.latency,
        "energy_j": bd.energy,
        "e_comp": bd.e_comp,
        "e_compr": bd.e_compr,
        "e_tr": bd.e_tr,
        "sdr_lower_bound": report.sdr_lower_bound,
        "rank1": report.rank1,
        "candidates_evaluated": report.candidates_evaluated,
        "solver_status": report.solver_status,
        "solver_iterations": report.solver_iterations,
    }


def _cmd_solve(args) -> int:
    instance = load_instance(args.config)
    options = RoundingOptions(
        l=args.samples,
        seed=args.seed,
        refine_gamma=args.refine_gamma,
        include_column_candidate=not args.no_column_candidate,
    )
    report = run_algorithm1(instance, options)
    if report.solver_status in (STATUS_INFEASIBLE, STATUS_NUMERICAL):
        print(f"solver failed: status {report.solver_status}", file=sys.stderr)
        return 2
    print(f"status: {report.solver_status} ({report.solver_iterations} iterations)")
    print(f"assignment (cpu per task): {list(report.decision.assignment.cpu_of)}")
    print(f"gamma: {report.gamma:.6f}")
    print(f"psi: {report.psi:.9g}  (latency {report.breakdown.latency:.6g} s, "
          f"energy {report.breakdown.energy:.6g} J)")
    print(f"relaxation lower bound: {report.sdr_lower_bound:.9g}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            json.dump(_decision_payload(report), handle, indent=2)
            handle.write("\n")
    return 0


def _cmd_oracle(args) -> int:
    instance = load_instance(args.config)
    result = solve_exact(instance, max_assignments=args.max_assignments)
    print(f"enumerated {result.enumerated} assignments")
    print(f"assignment (cpu per task): {list(result.decision.assignment.cpu_of)}")
    print(f"gamma: {result.decision.gamma:.6f}")
    print(f"psi (exact): {result.psi_p1:.9g}")
    print(f"psi (endpoint-bounded binary optimum): {result.psi_p3:.9g}")
    if args.out:
        payload = {
            "cpu_of": list(result.decision.assignment.cpu_of),
            "gamma": result.decision.gamma,
            "psi_p1": result.psi_p1,
            "psi_p3": result.psi_p3,
            "enumerated": result.enumerated,
        }
        with open(args.out, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2)
            handle.write("\n")
    return 0


def _cmd_bench(args) -> int:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as handle:
            config = config_from_json(handle.read(), source=args.config)
        config = ExperimentConfig(
            rate_range=config.rate_range,
            seed=args.seed,
            n_tasks=config.n_tasks,
            realizations=config.realizations,
            template=config.template,
            rounding=config.rounding,
            oracle_limit=config.oracle_limit,
            record_timing=config.record_timing or args.timing,
        )
    else:
        if not args.rates:
            raise ConfigError("bench needs --rates (or --config)")
        if args.n_min < 1 or args.n_max < args.n_min:
            raise ConfigError(f"invalid task sweep [{args.n_min}, {args.n_max}]")
        config = ExperimentConfig(
            rate_range=args.rates,
            seed=args.seed,
            n_tasks=tuple(range(args.n_min, args.n_max + 1)),
            realizations=args.realizations,
            rounding=RoundingOptions(l=args.samples, refine_gamma=not args.no_refine_gamma),
            oracle_limit=args.oracle_limit,
            record_timing=args.timing,
        )
    rows = run_benchmark(config)
    write_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    print(f"{'range':>6} {'n':>3} {'scheme':>15} {'mean psi':>12} {'std':>10} {'mean gamma':>11}")
    for agg in aggregate(rows):
        print(
            f"{agg.rate_range:>6} {agg.n_tasks:>3} {agg.scheme:>15} "
            f"{agg.mean_psi:>12.5g} {agg.std_psi:>10.4g} {agg.mean_gamma:>11.4f}"
        )
    return 0


def _cmd_compare(args) -> int:
    instance = load_instance(args.config)
    report = run_algorithm1(instance, RoundingOptions(l=args.samples, seed=args.seed))
    if report.solver_status in (STATUS_INFEASIBLE, STATUS_NUMERICAL):
        print(f"solver failed: status {report.solver_status}", file=sys.stderr)
        return 2
    result = solve_exact(instance, max_assignments=args.max_assignments)
    ratio = report.psi / result.psi_p1 if result.psi_p1 else float("inf")
    print(f"psi_sdr: {report.psi:.9g}")
    print(f"psi_oracle: {result.psi_p1:.9g}")
    print(f"ratio: {ratio:.9g}")
    print(f"relaxation lower bound: {report.sdr_lower_bound:.9g}")
    print(f"endpoint-bounded binary optimum: {result.psi_p3:.9g}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OracleSizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except SdpSolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
