import pytest

from conftest import grid_instance
from ppdsp.enc_request import (DecodeError, build_graph_map, decode_request,
                               encode_request, predicted_counts_request,
                               x_name)
from ppdsp.mipir import census, emit_lp


class TestGraphMap:
    def test_layout(self, golden_instance):
        gmap = build_graph_map(golden_instance)
        assert gmap.num_nodes == 8
        # pickups 1..3 carry +q, dropoffs 4..6 carry -q, depots carry 0
        assert gmap.location_of == (0, 1, 1, 2, 3, 2, 3, 0)
        assert gmap.volume_of == (0, 4, 2, 1, -4, -2, -1, 0)
        assert gmap.is_pickup(2) and gmap.is_dropoff(5)
        assert gmap.request_of(2) == 1 and gmap.request_of(5) == 1
        with pytest.raises(ValueError):
            gmap.request_of(0)


class TestCensus:
    @pytest.mark.parametrize("n,m", [(1, 1), (3, 2), (5, 3), (8, 2), (12, 4)])
    def test_census_matches_formula(self, n, m):
        inst = grid_instance(6, n, m)
        assert census(encode_request(inst).model) == predicted_counts_request(n, m)

    def test_census_independent_of_graph_size(self):
        counts = {census(encode_request(grid_instance(nv, 4, 2)).model)
                  for nv in (5, 9, 14)}
        assert counts == {predicted_counts_request(4, 2)}

    @pytest.mark.parametrize("n,m,expected", [
        (7, 2, (576, 1027)),
        (8, 2, (720, 1300)),
        (11, 2, (1248, 2311)),
        (11, 10, (6240, 11511)),
    ])
    def test_published_shapes(self, n, m, expected):
        assert predicted_counts_request(n, m) == expected
        inst = grid_instance(14, n, m)
        assert census(encode_request(inst).model) == expected


class TestModelShape:
    def test_speedup_fixings(self, golden_instance):
        vmap = encode_request(golden_instance).model.variable_map()
        assert vmap[x_name(0, 0, 4)].upper == 0.0  # depot straight to a dropoff
        assert vmap[x_name(0, 1, 7)].upper == 0.0  # pickup straight to end
        assert vmap[x_name(0, 4, 0)].upper == 0.0  # return to start depot
        assert vmap[x_name(0, 7, 1)].upper == 0.0  # departure from end depot
        assert vmap[x_name(0, 0, 7)].upper == 1.0  # idle drive stays open

    def test_oversized_request_is_barred_not_infeasible(self, golden_instance):
        # request 0 (q=4) exceeds truck 1's capacity 3: every truck-1 arc
        # touching its nodes is fixed to 0 and the load box is relaxed
        vmap = encode_request(golden_instance).model.variable_map()
        assert vmap[x_name(1, 0, 1)].upper == 0.0
        assert vmap[x_name(1, 4, 7)].upper == 0.0
        assert (vmap["h_t1_v1"].lower, vmap["h_t1_v1"].upper) == (0.0, 3.0)
        # reachable pickup keeps the verbatim box
        assert (vmap["h_t1_v2"].lower, vmap["h_t1_v2"].upper) == (2.0, 3.0)

    def test_barred_load_rows_stay_satisfiable(self, golden_instance):
        model = encode_request(golden_instance).model
        rows = {r.name: r for r in model.rows}
        # both directions between two barred-for-t1 nodes must admit h in [0,3]
        assert rows["ca9_t1_o1_d4"].rhs <= 0.0
        assert rows["ca9_t1_o4_d1"].rhs <= 0.0

    def test_objective_merges_payment_into_departure_arcs(self, golden_instance):
        vmap = encode_request(golden_instance).model.variable_map()
        inst = golden_instance
        # leaving pickup node 1 (request 0, at location a) toward node 3
        # (pickup of request 2 at location b) pays w0 minus cost(a,b)
        expected = inst.requests[0].w - inst.arc_cost(inst.trucks[0], 1, 2)
        assert vmap[x_name(0, 1, 3)].objective_coefficient == pytest.approx(expected)

    def test_emit_is_deterministic(self, golden_instance):
        a = emit_lp(encode_request(golden_instance).model)
        b = emit_lp(encode_request(golden_instance).model)
        assert a == b


def assignment_for_paths(encoding, paths):
    values = {v.name: 0.0 for v in encoding.model.variables}
    for t, path in paths.items():
        for o, d in zip(path, path[1:]):
            values[x_name(t, o, d)] = 1.0
    return values


class TestDecode:
    def test_round_trip_with_collapse(self, golden_instance):
        encoding = encode_request(golden_instance)
        # t0 serves r0,r1 (pickup nodes 1,2 co-located at a), t1 serves r2
        values = assignment_for_paths(encoding, {0: (0, 1, 2, 5, 4, 7),
                                                 1: (0, 3, 6, 7)})
        solution, raw = decode_request(encoding, values)
        p0 = solution.plan_for(0)
        assert p0.delivery == frozenset({0, 1})
        assert p0.route == (0, 1, 2, 3, 0)  # nodes 1,2 collapse to location a
        assert raw[0] == (0, 1, 2, 5, 4, 7)
        p1 = solution.plan_for(1)
        assert p1.delivery == frozenset({2}) and p1.route == (0, 2, 3, 0)

    def test_idle_truck_direct_drive(self, golden_instance):
        encoding = encode_request(golden_instance)
        values = assignment_for_paths(encoding, {0: (0, 7), 1: (0, 7)})
        solution, raw = decode_request(encoding, values)
        assert solution.plan_for(0).route == ()
        assert raw[0] == (0, 7)

    def test_missing_departure_rejected(self, golden_instance):
        encoding = encode_request(golden_instance)
        values = assignment_for_paths(encoding, {0: (0, 7)})
        with pytest.raises(DecodeError):
            decode_request(encoding, values)  # truck 1 never leaves the depot

    def test_dead_end_rejected(self, golden_instance):
        encoding = encode_request(golden_instance)
        values = assignment_for_paths(encoding, {0: (0, 1), 1: (0, 7)})
        with pytest.raises(DecodeError):
            decode_request(encoding, values)

    def test_stray_cycle_rejected(self, golden_instance):
        encoding = encode_request(golden_instance)
        values = assignment_for_paths(encoding, {0: (0, 7), 1: (0, 7)})
        values[x_name(0, 1, 2)] = 1.0
        values[x_name(0, 2, 1)] = 1.0
        with pytest.raises(DecodeError):
            decode_request(encoding, values)
