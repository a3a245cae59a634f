"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 verification failure (validator
violations, objective mismatch), 4 solver-process error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import enc_location, enc_request, harness, instgen
from .core import DeliveryRoutingSolution, TruckPlan, validate_solution, xi
from .instgen import ParseError
from .mipir import census, emit_lp

log = logging.getLogger("ppdsp")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VERIFY = 3
EXIT_SOLVER = 4

FORMULATION_ALIASES = {"loc": "location", "location": "location",
                       "req": "request", "request": "request"}


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _read_sample(path: str) -> instgen.TsplibSample:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}")
    try:
        name = os.path.splitext(os.path.basename(path))[0]
        return instgen.parse_tsplib(text, name=name)
    except ParseError as exc:
        raise CliError(f"{path}: {exc}")


def _read_instance(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}")
    try:
        return instgen.parse_instance(text)
    except ParseError as exc:
        raise CliError(f"{path}: {exc}")


def _adapter_from(template: str | None, dialect: str) -> harness.SolverAdapter | None:
    template = template or os.environ.get("PPDSP_SOLVER_CMD")
    if not template or template == "none":
        return None
    return harness.SolverAdapter(command_template=template, dialect=dialect)


def _parse_k_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise CliError(f"bad k list {text!r}")


def _fmt_k(k: float) -> str:
    return f"{k:g}"


def solution_to_json(solution: DeliveryRoutingSolution) -> str:
    doc = {"plans": [{"truck": p.truck_id,
                      "delivery": sorted(p.delivery),
                      "route": list(p.route)} for p in solution.plans]}
    return json.dumps(doc, indent=2) + "\n"


def solution_from_json(text: str) -> DeliveryRoutingSolution:
    try:
        doc = json.loads(text)
        plans = tuple(TruckPlan(truck_id=int(p["truck"]),
                                delivery=frozenset(int(r) for r in p["delivery"]),
                                route=tuple(int(v) for v in p["route"]))
                      for p in doc["plans"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CliError(f"bad solution file: {exc}")
    return DeliveryRoutingSolution(plans=plans)


def cmd_gen(args) -> int:
    sample = _read_sample(args.tsplib)
    k_list = _parse_k_list(args.k)
    try:
        family = instgen.generate_family(sample, k_list, args.m, args.seed)
    except (ValueError, instgen.PairingStalled) as exc:
        raise CliError(str(exc))
    os.makedirs(args.out, exist_ok=True)
    for k in sorted(k_list):
        instance = family[k]
        name = f"{sample.name}_k{_fmt_k(k)}_m{args.m}_s{args.seed}.instance"
        path = os.path.join(args.out, name)
        with open(path, "w") as fh:
            fh.write(instgen.serialize_instance(instance))
        print(f"k={_fmt_k(k)} n={instance.meta.n} -> {os.path.abspath(path)}")
    return EXIT_OK


def _encode(instance, formulation: str):
    if formulation == "location":
        encoding = enc_location.encode_location(instance)
        predicted = enc_location.predicted_counts_location(
            instance.graph.num_nodes, len(instance.requests), len(instance.trucks))
    else:
        encoding = enc_request.encode_request(instance)
        predicted = enc_request.predicted_counts_request(
            len(instance.requests), len(instance.trucks))
    counts = census(encoding.model)
    if counts != predicted:
        raise CliError(f"census {counts} disagrees with predicted {predicted}",
                       EXIT_VERIFY)
    return encoding, counts


def cmd_build(args) -> int:
    instance = _read_instance(args.instance)
    formulation = FORMULATION_ALIASES[args.formulation]
    encoding, counts = _encode(instance, formulation)
    with open(args.lp, "w") as fh:
        fh.write(emit_lp(encoding.model))
    print(f"vars={counts[0]} rows={counts[1]}")
    return EXIT_OK


def cmd_solve(args) -> int:
    instance = _read_instance(args.instance)
    formulation = FORMULATION_ALIASES[args.formulation]
    adapter = _adapter_from(args.solver, args.dialect)
    if adapter is None:
        raise CliError("no solver command (use --solver or PPDSP_SOLVER_CMD)")
    try:
        outcome = harness.solve(instance, formulation, adapter, args.time_limit)
    except harness.ObjectiveMismatch as exc:
        print(f"ObjectiveMismatch: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except harness.SolverProcessError as exc:
        print(f"solver process error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    print(f"status={outcome.status} objective="
          f"{'' if outcome.objective is None else f'{outcome.objective:.6f}'} "
          f"wall_time_s={outcome.wall_time_s:.3f}")
    if outcome.status == "Error":
        for violation in outcome.violations:
            print(f"  {violation}", file=sys.stderr)
        return EXIT_VERIFY if outcome.violations else EXIT_SOLVER
    if outcome.solution is not None and args.out:
        with open(args.out, "w") as fh:
            fh.write(solution_to_json(outcome.solution))
        print(f"solution -> {os.path.abspath(args.out)}")
    return EXIT_OK


def cmd_validate(args) -> int:
    instance = _read_instance(args.instance)
    with open(args.solution) as fh:
        solution = solution_from_json(fh.read())
    report = validate_solution(solution, instance)
    value = xi(solution, instance)
    print(f"xi={value:g}")
    if report.ok:
        print("valid")
        return EXIT_OK
    for violation in report.violations:
        print(str(violation))
    return EXIT_VERIFY


def cmd_oracle(args) -> int:
    instance = _read_instance(args.instance)
    limits = harness.OracleLimits(probe_transit=args.probe_transit)
    try:
        value, solution = harness.oracle(instance, args.semantics, limits,
                                         capacity_rule=args.capacity_rule)
    except harness.OracleRefused as exc:
        raise CliError(str(exc))
    print(f"optimal value: {value:g}")
    for plan in solution.plans:
        delivery = ",".join(f"r{r}" for r in sorted(plan.delivery)) or "-"
        route = "->".join(str(v) for v in plan.route) or "-"
        print(f"truck {plan.truck_id}: delivery={{{delivery}}} route={route}")
    return EXIT_OK


def cmd_bench(args) -> int:
    samples = [_read_sample(p) for p in args.tsplib]
    k_list = _parse_k_list(args.k)
    m_list = [int(v) for v in args.m.split(",") if v.strip()]
    formulations = [FORMULATION_ALIASES[f] for f in args.formulations.split(",")]
    adapter = _adapter_from(args.solver, args.dialect)
    records = harness.bench(samples, k_list, m_list, formulations, adapter,
                            args.time_limit, args.seed, workers=args.workers)
    csv_text = harness.records_to_csv(records)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(csv_text)
        print(f"csv -> {os.path.abspath(args.csv)}")
    else:
        sys.stdout.write(csv_text)
    return EXIT_OK


def cmd_report(args) -> int:
    import csv as csv_mod
    with open(args.csv) as fh:
        reader = csv_mod.DictReader(fh)
        records = []
        for row in reader:
            records.append(harness.BenchRecord(
                sample=row["sample"], k=float(row["k"]), m=int(row["m"]),
                n=int(row["n"]), formulation=row["formulation"],
                num_vars=int(row["num_vars"]), num_rows=int(row["num_rows"]),
                status=row["status"],
                objective=float(row["objective"]) if row["objective"] else None,
                wall_time_s=float(row["wall_time_s"]) if row["wall_time_s"] else None,
                seed=int(row["seed"])))
    text = harness.render_markdown(records, solver_label=args.solver_label,
                                   time_limit_s=args.time_limit)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"report -> {os.path.abspath(args.out)}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ppdsp")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate seeded instances from a TSPLIB sample")
    p.add_argument("--tsplib", required=True)
    p.add_argument("--k", required=True, help="comma-separated repetition rates")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("build", help="encode an instance to an LP file")
    p.add_argument("--instance", required=True)
    p.add_argument("--formulation", required=True, choices=sorted(FORMULATION_ALIASES))
    p.add_argument("--lp", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("solve", help="solve an instance via an external solver")
    p.add_argument("--instance", required=True)
    p.add_argument("--formulation", required=True, choices=sorted(FORMULATION_ALIASES))
    p.add_argument("--solver", help="command template; default $PPDSP_SOLVER_CMD")
    p.add_argument("--dialect", default="pairs", choices=["pairs", "xml"])
    p.add_argument("--time-limit", type=float, default=600.0)
    p.add_argument("--out", help="write the decoded solution as JSON")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="validate a solution file")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("oracle", help="exact enumeration optimum (small instances)")
    p.add_argument("--instance", required=True)
    p.add_argument("--semantics", default="location", choices=["location", "request"])
    p.add_argument("--capacity-rule", default="strict", choices=["strict", "netted"])
    p.add_argument("--probe-transit", action="store_true")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="run the benchmark grid")
    p.add_argument("--tsplib", nargs="+", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--m", required=True)
    p.add_argument("--formulations", default="location,request")
    p.add_argument("--solver", help="command template or 'none' for encode-only")
    p.add_argument("--dialect", default="pairs", choices=["pairs", "xml"])
    p.add_argument("--time-limit", type=float, default=600.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="render a bench CSV as a markdown table")
    p.add_argument("--csv", required=True)
    p.add_argument("--solver-label", default="none")
    p.add_argument("--time-limit", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    log.debug("configuration: %s", vars(args))
    try:
        return args.func(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
