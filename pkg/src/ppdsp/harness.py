"""Solver harness: subprocess solver adapter, exhaustive exact oracle for
both route semantics, golden-value enumeration, and the benchmark grid.
"""

from __future__ import annotations

import csv
import io
import itertools
import os
import re
import shlex
import subprocess
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from . import enc_location, enc_request
from .core import (DeliveryRoutingSolution, Instance, Truck, TruckPlan,
                   validate_solution, xi)
from .instgen import TsplibSample, generate_family
from .mipir import census, emit_lp, objective_value, parse_solution

OBJECTIVE_TOL = 1e-6


class OracleRefused(ValueError):
    pass


class SolverProcessError(RuntimeError):
    pass


class ObjectiveMismatch(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleLimits:
    max_requests: int = 5
    max_trucks: int = 3
    max_nodes: int = 8
    probe_transit: bool = False


@dataclass(frozen=True)
class SolverAdapter:
    """Subprocess solver boundary.

    command_template placeholders: {model_path}, {solution_path},
    {time_limit_s}. dialect selects the solution-file reader: "pairs"
    (name value per line) or "xml" (name/value attribute pairs).
    """

    command_template: str
    dialect: str = "pairs"
    workdir: Optional[str] = None

    def __post_init__(self):
        if "{model_path}" not in self.command_template:
            raise ValueError("command template must contain {model_path}")
        if self.dialect not in ("pairs", "xml"):
            raise ValueError(f"unknown dialect {self.dialect!r}")


@dataclass(frozen=True)
class SolveOutcome:
    status: str  # Optimal | Feasible | Infeasible | TimeLimit | Error
    objective: Optional[float]
    solution: Optional[DeliveryRoutingSolution]
    wall_time_s: float
    violations: tuple = ()
    raw_routes: Optional[dict] = None
    error: str = ""


@dataclass(frozen=True)
class BenchRecord:
    sample: str
    k: float
    m: int
    n: int
    formulation: str
    num_vars: int
    num_rows: int
    status: str
    objective: Optional[float]
    wall_time_s: Optional[float]
    seed: int


# --- feasibility primitives shared by oracle and enumeration -------------
#
# Two capacity readings exist for a stop that both loads and unloads:
# "strict" loads all pickups before anything is unloaded and bounds the
# peak (the reading under which the worked golden data's exhaustive listing
# is complete); "netted" only bounds the per-stop net load, which is exactly
# the feasible set of the location-based MIP's load-propagation rows.

def _route_feasible(instance: Instance, truck: Truck, delivery: tuple[int, ...],
                    perm: tuple[int, ...], capacity_rule: str = "strict") -> bool:
    requests = [instance.requests[rid] for rid in delivery]
    pos = {v: i for i, v in enumerate(perm)}
    for r in requests:
        if pos[r.pickup] >= pos[r.dropoff]:
            return False
    load = 0
    for v in perm:
        load += sum(r.q for r in requests if r.pickup == v)
        if capacity_rule == "strict" and load > truck.capacity:
            return False
        load -= sum(r.q for r in requests if r.dropoff == v)
        if load > truck.capacity or load < 0:
            return False
    return True


def _route_cost(instance: Instance, truck: Truck, perm: tuple[int, ...]) -> float:
    cost = instance.arc_cost(truck, 0, perm[0])
    for o, d in zip(perm, perm[1:]):
        cost += instance.arc_cost(truck, o, d)
    return cost + instance.arc_cost(truck, perm[-1], 0)


def _location_routes(instance: Instance, truck: Truck, delivery: tuple[int, ...],
                     probe_transit: bool = False, capacity_rule: str = "strict"):
    """Feasible depot-rooted location cycles for one truck, as permutations
    of the visited node set (optionally padded with transit nodes)."""
    needed = sorted({v for rid in delivery
                     for v in (instance.requests[rid].pickup,
                               instance.requests[rid].dropoff)})
    node_sets = [needed]
    if probe_transit:
        others = [v for v in range(1, instance.graph.num_nodes) if v not in needed]
        for extra_count in range(1, len(others) + 1):
            for extra in itertools.combinations(others, extra_count):
                node_sets.append(sorted(needed + list(extra)))
    for nodes in node_sets:
        for perm in itertools.permutations(nodes):
            if _route_feasible(instance, truck, delivery, perm, capacity_rule):
                yield perm


def _best_location_route(instance: Instance, truck: Truck, delivery: tuple[int, ...],
                         probe_transit: bool, capacity_rule: str
                         ) -> Optional[tuple[float, tuple[int, ...]]]:
    best: Optional[tuple[float, tuple[int, ...]]] = None
    for perm in _location_routes(instance, truck, delivery, probe_transit,
                                 capacity_rule):
        cost = _route_cost(instance, truck, perm)
        key = (cost, perm)
        if best is None or key < best:
            best = key
    return best


def _event_orderings(delivery: tuple[int, ...]):
    """All interleavings of pickup/dropoff events honouring per-request
    precedence. Events are (request id, is_dropoff)."""
    events = [(rid, 0) for rid in delivery] + [(rid, 1) for rid in delivery]

    def backtrack(remaining: list, picked: set, chosen: list):
        if not remaining:
            yield tuple(chosen)
            return
        for i, ev in enumerate(remaining):
            rid, is_drop = ev
            if is_drop and rid not in picked:
                continue
            chosen.append(ev)
            if not is_drop:
                picked.add(rid)
            yield from backtrack(remaining[:i] + remaining[i + 1:], picked, chosen)
            chosen.pop()
            if not is_drop:
                picked.discard(rid)

    yield from backtrack(events, set(), [])


def _best_request_route(instance: Instance, truck: Truck, delivery: tuple[int, ...]
                        ) -> Optional[tuple[float, tuple[int, ...]]]:
    """Cheapest feasible pickup/dropoff event sequence; cost runs over the
    event locations, with co-located consecutive events free."""
    best: Optional[tuple[float, tuple[int, ...]]] = None
    for order in _event_orderings(delivery):
        load = 0
        ok = True
        for rid, is_drop in order:
            load += -instance.requests[rid].q if is_drop else instance.requests[rid].q
            if load > truck.capacity or load < 0:
                ok = False
                break
        if not ok:
            continue
        locs = tuple(instance.requests[rid].dropoff if is_drop
                     else instance.requests[rid].pickup for rid, is_drop in order)
        cost = _route_cost(instance, truck, locs)
        # consecutive events at one location are a single physical stop
        collapsed = tuple(loc for i, loc in enumerate(locs)
                          if i == 0 or loc != locs[i - 1])
        key = (cost, collapsed)
        if best is None or key < best:
            best = key
    return best


def _check_limits(instance: Instance, limits: OracleLimits) -> None:
    n = len(instance.requests)
    m = len(instance.trucks)
    nv = instance.graph.num_nodes
    if n > limits.max_requests or m > limits.max_trucks or nv > limits.max_nodes:
        size = (len(instance.trucks) + 1) ** len(instance.requests)
        raise OracleRefused(
            f"instance too large for enumeration (n={n}, m={m}, |V|={nv}; "
            f"~{size} assignments)")


def _assignments(n: int, m: int):
    """Request -> truck-or-none vectors, lexicographic (none sorts first)."""
    yield from itertools.product([None] + list(range(m)), repeat=n)


def oracle(instance: Instance, semantics: str = "location",
           limits: OracleLimits = OracleLimits(),
           capacity_rule: str = "strict"
           ) -> tuple[float, DeliveryRoutingSolution]:
    """Exhaustive optimum over all request assignments and routes.

    semantics "location": each visited location appears once on a cycle;
    semantics "request": per-request pickup/dropoff events may revisit a
    location. Ties break toward the lexicographically smallest assignment
    vector, then route.

    capacity_rule "strict" bounds the peak load while a stop's pickups are
    on board (the definitional reading); "netted" bounds only the per-stop
    net load, which is the exact feasible set of the location-based MIP.
    Request semantics handles one event per node, so the rules coincide
    there.
    """
    if semantics not in ("location", "request"):
        raise ValueError(f"unknown semantics {semantics!r}")
    _check_limits(instance, limits)
    n = len(instance.requests)
    m = len(instance.trucks)
    best_value = 0.0
    best_plans: Optional[tuple[TruckPlan, ...]] = None
    for assignment in _assignments(n, m):
        deliveries: list[tuple[int, ...]] = [() for _ in range(m)]
        for rid, tid in enumerate(assignment):
            if tid is not None:
                deliveries[tid] = deliveries[tid] + (rid,)
        value = 0.0
        plans: list[TruckPlan] = []
        feasible = True
        for t in instance.trucks:
            delivery = deliveries[t.id]
            if not delivery:
                plans.append(TruckPlan(t.id, frozenset(), ()))
                continue
            if semantics == "location":
                found = _best_location_route(instance, t, delivery,
                                             limits.probe_transit, capacity_rule)
            else:
                found = _best_request_route(instance, t, delivery)
            if found is None:
                feasible = False
                break
            cost, perm = found
            value += sum(instance.requests[rid].w for rid in delivery) - cost
            plans.append(TruckPlan(t.id, frozenset(delivery), (0,) + perm + (0,)))
        if not feasible:
            continue
        if best_plans is None or value > best_value + 1e-12:
            best_value = value
            best_plans = tuple(plans)
    if best_plans is None:  # unreachable: the empty assignment is always feasible
        raise RuntimeError("no feasible solution found")
    return best_value, DeliveryRoutingSolution(plans=best_plans)


def enumerate_xi(instance: Instance, limits: OracleLimits = OracleLimits()
                 ) -> list[tuple[DeliveryRoutingSolution, float]]:
    """Every feasible (assignment, routes) combination under the location
    route semantics, each scored; routes cover exactly the visited node set."""
    _check_limits(instance, limits)
    n = len(instance.requests)
    m = len(instance.trucks)
    out: list[tuple[DeliveryRoutingSolution, float]] = []
    for assignment in _assignments(n, m):
        deliveries: list[tuple[int, ...]] = [() for _ in range(m)]
        for rid, tid in enumerate(assignment):
            if tid is not None:
                deliveries[tid] = deliveries[tid] + (rid,)
        per_truck_routes: list[list[tuple[int, ...]]] = []
        feasible = True
        for t in instance.trucks:
            delivery = deliveries[t.id]
            if not delivery:
                per_truck_routes.append([()])
                continue
            routes = [(0,) + perm + (0,)
                      for perm in _location_routes(instance, t, delivery)]
            if not routes:
                feasible = False
                break
            per_truck_routes.append(sorted(routes))
        if not feasible:
            continue
        for combo in itertools.product(*per_truck_routes):
            plans = tuple(TruckPlan(t.id, frozenset(deliveries[t.id]), combo[t.id])
                          for t in instance.trucks)
            solution = DeliveryRoutingSolution(plans=plans)
            out.append((solution, xi(solution, instance)))
    return out


# --- external solving -----------------------------------------------------

_XML_PAIR_RE = re.compile(
    r'name="(?P<name>[^"]+)"\s+value="(?P<value>[^"]+)"')


def normalize_solution_text(text: str, dialect: str) -> str:
    if dialect == "pairs":
        return text
    lines = []
    for match in _XML_PAIR_RE.finditer(text):
        lines.append(f"{match.group('name')} {match.group('value')}")
    return "\n".join(lines) + ("\n" if lines else "")


_STATUS_NAMES = {"optimal": "Optimal", "feasible": "Feasible",
                 "infeasible": "Infeasible", "timelimit": "TimeLimit",
                 "error": "Error"}


def _scan_status(text: str) -> Optional[str]:
    for line in text.splitlines():
        if line.startswith("# status"):
            token = line.split()[-1].strip().lower()
            return _STATUS_NAMES.get(token, "Error")
    return None


def run_adapter(adapter: SolverAdapter, lp_text: str, time_limit_s: float
                ) -> tuple[str, Optional[str]]:
    """Write the model, invoke the solver process, read the solution text.

    Returns (normalized solution text, declared status or None).
    """
    with tempfile.TemporaryDirectory(dir=adapter.workdir) as tmp:
        model_path = os.path.join(tmp, "model.lp")
        solution_path = os.path.join(tmp, "solution.sol")
        with open(model_path, "w") as fh:
            fh.write(lp_text)
        command = adapter.command_template.format(
            model_path=shlex.quote(model_path),
            solution_path=shlex.quote(solution_path),
            time_limit_s=time_limit_s)
        proc = subprocess.run(command, shell=True, cwd=tmp,
                              capture_output=True, text=True,
                              timeout=time_limit_s + 120)
        if proc.returncode != 0:
            raise SolverProcessError(
                f"solver exited with {proc.returncode}: {proc.stderr.strip()[:500]}")
        if not os.path.exists(solution_path):
            raise SolverProcessError("solver produced no solution file")
        with open(solution_path) as fh:
            raw = fh.read()
    status = _scan_status(raw)
    return normalize_solution_text(raw, adapter.dialect), status


def request_raw_checks(encoding, raw_routes: dict[int, tuple[int, ...]]) -> list[str]:
    """Per-request precedence and per-event capacity on the raw duplicated
    node sequences of a decoded request-model solution."""
    problems: list[str] = []
    gmap = encoding.graph_map
    instance = encoding.instance
    for t in instance.trucks:
        path = raw_routes.get(t.id, ())
        load = 0
        seen_pickup: set[int] = set()
        for v in path[1:-1]:
            rid = gmap.request_of(v)
            if gmap.is_pickup(v):
                seen_pickup.add(rid)
                load += instance.requests[rid].q
            else:
                if rid not in seen_pickup:
                    problems.append(f"truck {t.id}: dropoff of request {rid} "
                                    "before its pickup")
                load -= instance.requests[rid].q
            if load > t.capacity:
                problems.append(f"truck {t.id}: load {load} over capacity at node {v}")
            if load < 0:
                problems.append(f"truck {t.id}: negative load at node {v}")
    return problems


def solve(instance: Instance, formulation: str, adapter: SolverAdapter,
          time_limit_s: float = 600.0) -> SolveOutcome:
    """Encode, emit, run the external solver, decode, validate, and
    cross-check the objective against the recomputed profit-cost value."""
    start = time.monotonic()
    if formulation == "location":
        encoding = enc_location.encode_location(instance)
    elif formulation == "request":
        encoding = enc_request.encode_request(instance)
    else:
        raise ValueError(f"unknown formulation {formulation!r}")
    lp_text = emit_lp(encoding.model)
    try:
        solution_text, declared = run_adapter(adapter, lp_text, time_limit_s)
    except (SolverProcessError, subprocess.TimeoutExpired) as exc:
        return SolveOutcome(status="Error", objective=None, solution=None,
                            wall_time_s=time.monotonic() - start, error=str(exc))
    has_values = any(line.strip() and not line.startswith("#")
                     for line in solution_text.splitlines())
    status = declared or ("Infeasible" if not has_values else "Optimal")
    if status in ("Infeasible", "TimeLimit", "Error"):
        return SolveOutcome(status=status, objective=None, solution=None,
                            wall_time_s=time.monotonic() - start)

    assignment, _warnings = parse_solution(solution_text, encoding.model)
    solver_objective = objective_value(encoding.model, assignment)
    raw_routes = None
    try:
        if formulation == "location":
            decoded = enc_location.decode_location(encoding, assignment)
            report = validate_solution(decoded, instance)
            problems = [str(v) for v in report.violations]
        else:
            decoded, raw_routes = enc_request.decode_request(encoding, assignment)
            problems = request_raw_checks(encoding, raw_routes)
    except (enc_location.DecodeError, enc_request.DecodeError) as exc:
        return SolveOutcome(status="Error", objective=solver_objective, solution=None,
                            wall_time_s=time.monotonic() - start, error=str(exc))
    value = xi(decoded, instance)
    if abs(solver_objective - value) > OBJECTIVE_TOL * max(1.0, abs(value)):
        raise ObjectiveMismatch(
            f"solver objective {solver_objective} != recomputed value {value}")
    if problems:
        return SolveOutcome(status="Error", objective=solver_objective,
                            solution=decoded, wall_time_s=time.monotonic() - start,
                            violations=tuple(problems), raw_routes=raw_routes,
                            error="claimed-feasible solution fails validation")
    return SolveOutcome(status=status, objective=solver_objective, solution=decoded,
                        wall_time_s=time.monotonic() - start, raw_routes=raw_routes)


# --- benchmark grid -------------------------------------------------------

CSV_HEADER = ["sample", "k", "m", "n", "formulation", "num_vars", "num_rows",
              "status", "objective", "wall_time_s", "seed"]


def _bench_cell(instance: Instance, formulation: str,
                adapter: Optional[SolverAdapter], time_limit_s: float) -> BenchRecord:
    meta = instance.meta
    if formulation == "location":
        encoding = enc_location.encode_location(instance)
        predicted = enc_location.predicted_counts_location(
            instance.graph.num_nodes, meta.n, meta.m)
    else:
        encoding = enc_request.encode_request(instance)
        predicted = enc_request.predicted_counts_request(meta.n, meta.m)
    counts = census(encoding.model)
    if counts != predicted:
        raise AssertionError(
            f"census {counts} disagrees with predicted {predicted} "
            f"({meta.sample}, k={meta.k}, m={meta.m}, {formulation})")
    if adapter is None:
        return BenchRecord(meta.sample, meta.k, meta.m, meta.n, formulation,
                           counts[0], counts[1], "EncodeOnly", None, None, meta.seed)
    try:
        outcome = solve(instance, formulation, adapter, time_limit_s)
        return BenchRecord(meta.sample, meta.k, meta.m, meta.n, formulation,
                           counts[0], counts[1], outcome.status, outcome.objective,
                           outcome.wall_time_s, meta.seed)
    except (ObjectiveMismatch, SolverProcessError) as exc:
        return BenchRecord(meta.sample, meta.k, meta.m, meta.n, formulation,
                           counts[0], counts[1], "Error", None, None, meta.seed)


def bench(samples: list[TsplibSample], k_list: list[float], m_list: list[int],
          formulations: list[str], adapter: Optional[SolverAdapter],
          time_limit_s: float, seed: int, workers: int = 1
          ) -> list[BenchRecord]:
    """One record per (sample, k, m, formulation) cell; failures are recorded
    per cell and the run continues."""
    cells: list[tuple[Instance, str]] = []
    for sample in samples:
        for m in m_list:
            family = generate_family(sample, k_list, m, seed)
            for k in sorted(k_list):
                for formulation in formulations:
                    cells.append((family[k], formulation))
    if adapter is None or workers <= 1:
        return [_bench_cell(inst, form, adapter, time_limit_s)
                for inst, form in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_bench_cell, inst, form, adapter, time_limit_s)
                   for inst, form in cells]
        return [f.result() for f in futures]


def records_to_csv(records: list[BenchRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow([
            r.sample, f"{r.k:g}", r.m, r.n, r.formulation, r.num_vars, r.num_rows,
            r.status,
            "" if r.objective is None else f"{r.objective:.6f}",
            "" if r.wall_time_s is None else f"{r.wall_time_s:.3f}",
            r.seed,
        ])
    return buf.getvalue()


def render_markdown(records: list[BenchRecord], solver_label: str = "none",
                    time_limit_s: Optional[float] = None) -> str:
    """Tables-style markdown: one table per (sample, m), request vs location
    columns per k, with the smaller count and the larger objective in bold.

    Objective columns carry the solver name and time limit so the numbers
    cannot be mistaken for published figures obtained under other settings.
    """
    by_table: dict[tuple[str, int], dict[tuple[float, str], BenchRecord]] = {}
    for r in records:
        by_table.setdefault((r.sample, r.m), {})[(r.k, r.formulation)] = r
    obj_label = f"Obj. [{solver_label}"
    if time_limit_s is not None:
        obj_label += f", {time_limit_s:g}s limit"
    obj_label += "]"
    lines: list[str] = []
    for (sample, m), cells in sorted(by_table.items()):
        ks = sorted({k for k, _ in cells})
        lines.append(f"### {sample}, m={m}")
        header = ["item"] + [f"k={k:g} (req / loc)" for k in ks]
        lines.append("| " + " | ".join(header) + " |")
        lines.append("|" + "---|" * len(header))
        for item, attr, smaller_wins in (("#Var.", "num_vars", True),
                                         ("#Con.", "num_rows", True),
                                         (obj_label, "objective", False)):
            row = [item]
            for k in ks:
                req = cells.get((k, "request"))
                loc = cells.get((k, "location"))
                row.append(_versus(getattr(req, attr, None) if req else None,
                                   getattr(loc, attr, None) if loc else None,
                                   smaller_wins))
            lines.append("| " + " | ".join(row) + " |")
        lines.append("")
    return "\n".join(lines)


def _versus(left, right, smaller_wins: bool) -> str:
    def fmt(v):
        if v is None:
            return "-"
        if isinstance(v, float):
            return f"{v:g}"
        return str(v)

    if left is None or right is None or left == right:
        return f"{fmt(left)} / {fmt(right)}"
    left_wins = (left < right) if smaller_wins else (left > right)
    if left_wins:
        return f"**{fmt(left)}** / {fmt(right)}"
    return f"{fmt(left)} / **{fmt(right)}**"
