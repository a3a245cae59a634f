"""Request-based MIP encoder: every request gets its own pickup node and
dropoff node, plus start/end depot copies at the same physical spot.

Node layout for n requests (N = 2n+2 nodes total):
  0        start depot
  1..n     pickup of request id v-1
  n+1..2n  dropoff of request id v-n-1
  2n+1     end depot
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import DeliveryRoutingSolution, Instance, TruckPlan
from .mipir import MipModel, ModelBuilder, Sense, VarKind


class DecodeError(ValueError):
    pass


def x_name(t: int, o: int, d: int) -> str:
    return f"x_t{t}_o{o}_d{d}"


def u_name(t: int, v: int) -> str:
    return f"u_t{t}_v{v}"


def h_name(t: int, v: int) -> str:
    return f"h_t{t}_v{v}"


@dataclass(frozen=True)
class RequestGraphMap:
    """Duplicated-node table: per node its source location and signed volume."""

    num_requests: int
    location_of: tuple[int, ...]
    volume_of: tuple[int, ...]

    @property
    def num_nodes(self) -> int:
        return 2 * self.num_requests + 2

    def is_pickup(self, v: int) -> bool:
        return 1 <= v <= self.num_requests

    def is_dropoff(self, v: int) -> bool:
        return self.num_requests + 1 <= v <= 2 * self.num_requests

    def request_of(self, v: int) -> int:
        if self.is_pickup(v):
            return v - 1
        if self.is_dropoff(v):
            return v - self.num_requests - 1
        raise ValueError(f"node {v} is a depot")


def build_graph_map(instance: Instance) -> RequestGraphMap:
    n = len(instance.requests)
    location_of = [0] * (2 * n + 2)
    volume_of = [0] * (2 * n + 2)
    for r in instance.requests:
        location_of[r.id + 1] = r.pickup
        volume_of[r.id + 1] = r.q
        location_of[r.id + 1 + n] = r.dropoff
        volume_of[r.id + 1 + n] = -r.q
    location_of[0] = 0
    location_of[2 * n + 1] = 0
    return RequestGraphMap(num_requests=n, location_of=tuple(location_of),
                           volume_of=tuple(volume_of))


@dataclass(frozen=True)
class RequestEncoding:
    model: MipModel
    graph_map: RequestGraphMap
    instance: Instance


def predicted_counts_request(n: int, m: int) -> tuple[int, int]:
    """Closed-form census of the request-based model (N = 2n+2 nodes)."""
    nn = 2 * n + 2
    variables = m * nn * nn + 2 * m * nn
    rows = 2 * m + n + 4 * m * n + 2 * m * nn * (nn - 1)
    return variables, rows


def _fixed_to_zero(gmap: RequestGraphMap, o: int, d: int) -> bool:
    """Speed-up variable fixings: self arcs, depot shortcuts, returns to the
    start depot and departures from the end depot."""
    n = gmap.num_requests
    end = 2 * n + 1
    if o == d:
        return True
    if o == 0 and gmap.is_dropoff(d):
        return True
    if gmap.is_pickup(o) and d == end:
        return True
    if d == 0 and (gmap.is_pickup(o) or gmap.is_dropoff(o)):
        return True
    if o == end and (gmap.is_pickup(d) or gmap.is_dropoff(d)):
        return True
    return False


def encode_request(instance: Instance) -> RequestEncoding:
    gmap = build_graph_map(instance)
    nn = gmap.num_nodes
    n = gmap.num_requests
    end = nn - 1
    trucks = instance.trucks
    b = ModelBuilder()

    # nodes whose load change alone overflows a truck are unreachable for it;
    # barring the arcs keeps the verbatim load bounds from emptying out
    def unreachable(t, v: int) -> bool:
        return abs(gmap.volume_of[v]) > t.capacity

    # name tables and per-truck node-pair cost tables, hoisted out of the
    # O(N^2)-per-truck row loops
    xn: dict[int, list[list[str]]] = {}
    un: dict[int, list[str]] = {}
    hn: dict[int, list[str]] = {}
    barred: dict[int, list[bool]] = {}
    for t in trucks:
        xn[t.id] = [[x_name(t.id, o, d) for d in range(nn)] for o in range(nn)]
        un[t.id] = [u_name(t.id, v) for v in range(nn)]
        hn[t.id] = [h_name(t.id, v) for v in range(nn)]
        barred[t.id] = [unreachable(t, v) for v in range(nn)]

    # payment is collected on departure from a pickup node, merged into the
    # arc objective coefficients
    for t in trucks:
        loc_cost = [[instance.arc_cost(t, o, d)
                     for d in range(instance.graph.num_nodes)]
                    for o in range(instance.graph.num_nodes)]
        bar_t = barred[t.id]
        for o in range(nn):
            w_o = instance.requests[gmap.request_of(o)].w if gmap.is_pickup(o) else 0.0
            cost_o = loc_cost[gmap.location_of[o]]
            for d in range(nn):
                fixed = _fixed_to_zero(gmap, o, d) or bar_t[o] or bar_t[d]
                b.add_variable(xn[t.id][o][d], VarKind.BINARY, 0.0,
                               0.0 if fixed else 1.0,
                               objective=w_o - cost_o[gmap.location_of[d]])
    for t in trucks:
        for v in range(nn):
            b.add_variable(un[t.id][v], VarKind.INTEGER, 0.0, nn - 1)
    for t in trucks:
        for v in range(nn):
            q_v = gmap.volume_of[v]
            if barred[t.id][v]:
                b.add_variable(hn[t.id][v], VarKind.CONTINUOUS,
                               0.0, float(t.capacity))
            else:
                b.add_variable(hn[t.id][v], VarKind.CONTINUOUS,
                               float(max(0, q_v)),
                               float(min(t.capacity, t.capacity + q_v)))

    # every route leaves the start depot once and enters the end depot once
    for t in trucks:
        b.add_row(f"ca3s_t{t.id}",
                  [(x_name(t.id, 0, d), 1.0) for d in range(1, nn)], Sense.EQ, 1.0)
        b.add_row(f"ca3e_t{t.id}",
                  [(x_name(t.id, o, end), 1.0) for o in range(end)], Sense.EQ, 1.0)
    # each pickup node visited at most once, over all trucks
    for d in range(1, n + 1):
        b.add_row(f"ca4_d{d}",
                  [(x_name(t.id, o, d), 1.0)
                   for t in trucks for o in range(nn) if o != d],
                  Sense.LE, 1.0)
    # pickup and dropoff of one request stay on the same truck
    for t in trucks:
        x_t = xn[t.id]
        for o in range(1, n + 1):
            terms = [(x_t[o][d], 1.0) for d in range(nn) if d != o]
            terms += [(x_t[o + n][d], -1.0) for d in range(nn) if d != o + n]
            b.add_row(f"ca5_t{t.id}_o{o}", terms, Sense.EQ, 0.0)
    # flow conservation at every pickup/dropoff node
    for t in trucks:
        x_t = xn[t.id]
        for v in range(1, end):
            terms = [(x_t[v][d], 1.0) for d in range(nn) if d != v]
            terms += [(x_t[o][v], -1.0) for o in range(nn) if o != v]
            b.add_row(f"ca6_t{t.id}_v{v}", terms, Sense.EQ, 0.0)
    # MTZ ordering over all ordered node pairs
    for t in trucks:
        u_t, x_t = un[t.id], xn[t.id]
        for o in range(nn):
            for d in range(nn):
                if o == d:
                    continue
                b.add_row(f"ca7_t{t.id}_o{o}_d{d}",
                          ((u_t[d], 1.0), (u_t[o], -1.0),
                           (x_t[o][d], -float(nn))),
                          Sense.GE, 1.0 - nn, merged=True)
    # loading before unloading, per request (integer-gap form)
    for t in trucks:
        for r in range(1, n + 1):
            b.add_row(f"ca8_t{t.id}_r{r - 1}",
                      [(un[t.id][r + n], 1.0), (un[t.id][r], -1.0)],
                      Sense.GE, 1.0)
    # load propagation along traversed arcs; an unreachable target keeps its
    # row (arcs there are already barred) but with the volume zeroed so the
    # relaxed h box cannot make the vacuous case contradictory
    for t in trucks:
        h_t, x_t, bar_t = hn[t.id], xn[t.id], barred[t.id]
        cap = float(t.capacity)
        rhs_of = [float((0 if bar_t[d] else gmap.volume_of[d]) - t.capacity)
                  for d in range(nn)]
        for o in range(nn):
            for d in range(nn):
                if o == d:
                    continue
                b.add_row(f"ca9_t{t.id}_o{o}_d{d}",
                          ((h_t[d], 1.0), (h_t[o], -1.0), (x_t[o][d], -cap)),
                          Sense.GE, rhs_of[d], merged=True)
    b.annotate("formulation", "request")
    return RequestEncoding(model=b.build(), graph_map=gmap, instance=instance)


INT_TOL = 1e-6


def _as_bit(name: str, value: float) -> int:
    if abs(value) <= INT_TOL:
        return 0
    if abs(value - 1.0) <= INT_TOL:
        return 1
    raise DecodeError(f"{name} = {value} is not integral")


def decode_request(encoding: RequestEncoding, assignment: dict[str, float]
                   ) -> tuple[DeliveryRoutingSolution, dict[int, tuple[int, ...]]]:
    """Walk each truck's 0 -> ... -> 2n+1 path; a request is served by the
    truck whose path enters its pickup node.

    Returns the solution in location vocabulary (consecutive co-located
    nodes collapsed) plus the raw node sequences for auditing.
    """
    gmap = encoding.graph_map
    instance = encoding.instance
    nn = gmap.num_nodes
    end = nn - 1
    plans = []
    raw_routes: dict[int, tuple[int, ...]] = {}
    for t in instance.trucks:
        successor: dict[int, int] = {}
        for o in range(nn):
            for d in range(nn):
                if o == d:
                    continue
                if _as_bit(x_name(t.id, o, d), assignment.get(x_name(t.id, o, d), 0.0)):
                    if o in successor:
                        raise DecodeError(f"truck {t.id}: two departures from node {o}")
                    successor[o] = d
        if 0 not in successor:
            raise DecodeError(f"truck {t.id}: no arc leaves the start depot")
        node_path = [0]
        node = successor.pop(0)
        while node != end:
            node_path.append(node)
            if node not in successor:
                raise DecodeError(f"truck {t.id}: path dead-ends at node {node}")
            node = successor.pop(node)
        node_path.append(end)
        if successor:
            stray = next(iter(successor))
            raise DecodeError(f"truck {t.id}: arcs off the depot path at node {stray}")
        raw_routes[t.id] = tuple(node_path)
        delivery = frozenset(gmap.request_of(v) for v in node_path if gmap.is_pickup(v))
        locations = [gmap.location_of[v] for v in node_path]
        route: list[int] = []
        for loc in locations:
            if not route or route[-1] != loc:
                route.append(loc)
        if len(route) == 1:  # straight 0 -> end drive, both depots co-located
            route = []
        plans.append(TruckPlan(truck_id=t.id, delivery=delivery,
                               route=tuple(route)))
    return DeliveryRoutingSolution(plans=tuple(plans)), raw_routes
