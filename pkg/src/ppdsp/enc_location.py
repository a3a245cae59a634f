"""Location-based MIP encoder: nodes are unique physical locations.

Variable roles: x_t{t}_o{o}_d{d} arc binaries, y_t{t}_r{r} assignment
binaries, u_t{t}_v{v} integer visit-order, h_t{t}_v{v} continuous departing
load. Strict order inequalities are rewritten with a -1 gap, exact because
u is integer.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import DeliveryRoutingSolution, Instance, TruckPlan
from .mipir import MipModel, ModelBuilder, Sense, VarKind


class DecodeError(ValueError):
    pass


def x_name(t: int, o: int, d: int) -> str:
    return f"x_t{t}_o{o}_d{d}"


def y_name(t: int, r: int) -> str:
    return f"y_t{t}_r{r}"


def u_name(t: int, v: int) -> str:
    return f"u_t{t}_v{v}"


def h_name(t: int, v: int) -> str:
    return f"h_t{t}_v{v}"


@dataclass(frozen=True)
class LocationEncoding:
    model: MipModel
    instance: Instance


def predicted_counts_location(num_nodes: int, n: int, m: int) -> tuple[int, int]:
    """Closed-form census of the location-based model."""
    nv = num_nodes
    variables = m * nv * nv + m * n + 2 * m * (nv - 1)
    rows = n + 3 * m * n + 2 * m * nv + 3 * m * (nv - 1) * (nv - 2)
    return variables, rows


def encode_location(instance: Instance) -> LocationEncoding:
    nv = instance.graph.num_nodes
    trucks = instance.trucks
    requests = instance.requests
    b = ModelBuilder()

    # name tables, filled per truck inside the variable loops below
    xn: dict[int, list[list[str]]] = {}
    un: dict[int, list[str]] = {}
    hn: dict[int, list[str]] = {}

    # objective: payments on y minus arc costs on x; diagonal arcs fixed to 0
    for t in trucks:
        xn[t.id] = [[x_name(t.id, o, d) for d in range(nv)] for o in range(nv)]
        for o in range(nv):
            for d in range(nv):
                upper = 0.0 if o == d else 1.0
                b.add_variable(xn[t.id][o][d], VarKind.BINARY, 0.0, upper,
                               objective=-instance.arc_cost(t, o, d))
    for t in trucks:
        for r in requests:
            b.add_variable(y_name(t.id, r.id), VarKind.BINARY, 0.0, 1.0,
                           objective=r.w)
    for t in trucks:
        un[t.id] = [u_name(t.id, v) for v in range(nv)]
        for v in range(1, nv):
            b.add_variable(un[t.id][v], VarKind.INTEGER, 0.0, nv - 2)
    for t in trucks:
        hn[t.id] = [h_name(t.id, v) for v in range(nv)]
        for v in range(1, nv):
            b.add_variable(hn[t.id][v], VarKind.CONTINUOUS, 0.0, t.capacity)

    # each request to at most one truck
    for r in requests:
        b.add_row(f"c3_r{r.id}",
                  [(y_name(t.id, r.id), 1.0) for t in trucks], Sense.LE, 1.0)
    # serving a request forces a visit of its pickup and its dropoff
    for t in trucks:
        x_t = xn[t.id]
        for r in requests:
            b.add_row(f"c4_t{t.id}_r{r.id}",
                      [(y_name(t.id, r.id), 1.0)]
                      + [(x_t[o][r.pickup], -1.0)
                         for o in range(nv) if o != r.pickup],
                      Sense.LE, 0.0)
    for t in trucks:
        x_t = xn[t.id]
        for r in requests:
            b.add_row(f"c5_t{t.id}_r{r.id}",
                      [(y_name(t.id, r.id), 1.0)]
                      + [(x_t[o][r.dropoff], -1.0)
                         for o in range(nv) if o != r.dropoff],
                      Sense.LE, 0.0)
    # flow conservation and at most one departure per location
    for t in trucks:
        x_t = xn[t.id]
        for o in range(nv):
            terms = [(x_t[o][d], 1.0) for d in range(nv) if d != o]
            terms += [(x_t[d][o], -1.0) for d in range(nv) if d != o]
            b.add_row(f"c6_t{t.id}_o{o}", terms, Sense.EQ, 0.0)
    for t in trucks:
        x_t = xn[t.id]
        for o in range(nv):
            b.add_row(f"c7_t{t.id}_o{o}",
                      [(x_t[o][d], 1.0) for d in range(nv) if d != o],
                      Sense.LE, 1.0)
    # MTZ ordering over non-depot pairs
    for t in trucks:
        u_t, x_t = un[t.id], xn[t.id]
        for o in range(1, nv):
            for d in range(1, nv):
                if o == d:
                    continue
                b.add_row(f"c8_t{t.id}_o{o}_d{d}",
                          ((u_t[d], 1.0), (u_t[o], -1.0),
                           (x_t[o][d], -float(nv))),
                          Sense.GE, 1.0 - nv, merged=True)
    # pickup order precedes dropoff order when assigned (integer-gap rewrite)
    for t in trucks:
        for r in requests:
            b.add_row(f"c9_t{t.id}_r{r.id}",
                      [(u_name(t.id, r.pickup), 1.0),
                       (u_name(t.id, r.dropoff), -1.0),
                       (y_name(t.id, r.id), float(nv))],
                      Sense.LE, nv - 1.0)
    # load propagation along traversed arcs, big-M pair per ordered pair
    total_volume = sum(r.q for r in requests)
    for t in trucks:
        big_m = float(t.capacity + total_volume)
        h_t, x_t = hn[t.id], xn[t.id]
        # per-destination net load change terms, shared by every origin
        gamma_of = [
            [(y_name(t.id, r.id), -float(r.q)) for r in requests if r.pickup == d]
            + [(y_name(t.id, r.id), float(r.q)) for r in requests if r.dropoff == d]
            for d in range(nv)]
        for o in range(1, nv):
            for d in range(1, nv):
                if o == d:
                    continue
                base = [(h_t[d], 1.0), (h_t[o], -1.0)] + gamma_of[d]
                b.add_row(f"c10a_t{t.id}_o{o}_d{d}",
                          base + [(x_t[o][d], big_m)],
                          Sense.LE, big_m, merged=True)
                b.add_row(f"c10b_t{t.id}_o{o}_d{d}",
                          base + [(x_t[o][d], -big_m)],
                          Sense.GE, -big_m, merged=True)
    b.annotate("formulation", "location")
    return LocationEncoding(model=b.build(), instance=instance)


INT_TOL = 1e-6


def _as_bit(name: str, value: float) -> int:
    if abs(value) <= INT_TOL:
        return 0
    if abs(value - 1.0) <= INT_TOL:
        return 1
    raise DecodeError(f"{name} = {value} is not integral")


def decode_location(encoding: LocationEncoding,
                    assignment: dict[str, float]) -> DeliveryRoutingSolution:
    """Rebuild per-truck deliveries from y and routes by walking x arcs from
    the depot."""
    instance = encoding.instance
    nv = instance.graph.num_nodes
    plans = []
    for t in instance.trucks:
        delivery = frozenset(
            r.id for r in instance.requests
            if _as_bit(y_name(t.id, r.id), assignment.get(y_name(t.id, r.id), 0.0)))
        successor: dict[int, int] = {}
        for o in range(nv):
            for d in range(nv):
                if o == d:
                    continue
                if _as_bit(x_name(t.id, o, d), assignment.get(x_name(t.id, o, d), 0.0)):
                    if o in successor:
                        raise DecodeError(f"truck {t.id}: two departures from node {o}")
                    successor[o] = d
        if not successor:
            if delivery:
                raise DecodeError(f"truck {t.id}: requests assigned but no arcs")
            plans.append(TruckPlan(truck_id=t.id, delivery=delivery, route=()))
            continue
        if 0 not in successor:
            raise DecodeError(f"truck {t.id}: arcs present but none leaves the depot")
        route = [0]
        node = successor.pop(0)
        while node != 0:
            route.append(node)
            if node not in successor:
                raise DecodeError(f"truck {t.id}: route dead-ends at node {node}")
            node = successor.pop(node)
        route.append(0)
        if successor:
            stray = next(iter(successor))
            raise DecodeError(f"truck {t.id}: arcs off the depot cycle at node {stray}")
        plans.append(TruckPlan(truck_id=t.id, delivery=delivery, route=tuple(route)))
    return DeliveryRoutingSolution(plans=tuple(plans))
