import json
import os
import sys

import pytest

from conftest import data_path
from ppdsp.cli import main
from ppdsp.enc_request import predicted_counts_request
from ppdsp.instgen import serialize_instance

HIGHS_TEMPLATE = (f"{sys.executable} -m ppdsp.highs_solver "
                  "{model_path} {solution_path} {time_limit_s}")


@pytest.fixture()
def golden_path(tmp_path, golden_instance):
    path = tmp_path / "golden.instance"
    path.write_text(serialize_instance(golden_instance))
    return str(path)


def read_all(directory):
    out = {}
    for name in sorted(os.listdir(directory)):
        with open(os.path.join(directory, name), "rb") as fh:
            out[name] = fh.read()
    return out


class TestGen:
    def test_family_sizes_and_names(self, tmp_path, capsys):
        out = tmp_path / "instances"
        code = main(["gen", "--tsplib", data_path("burma14.tsp"),
                     "--k", "1,1.5,2,2.5,3", "--m", "2", "--seed", "7",
                     "--out", str(out)])
        assert code == 0
        printed = capsys.readouterr().out
        assert [int(line.split("n=")[1].split()[0])
                for line in printed.strip().splitlines()] == [7, 10, 13, 16, 20]
        names = sorted(os.listdir(out))
        assert names == sorted(f"burma14_k{k}_m2_s7.instance"
                               for k in ("1", "1.5", "2", "2.5", "3"))

    def test_rerun_is_byte_identical(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            assert main(["gen", "--tsplib", data_path("burma14.tsp"),
                         "--k", "1,2", "--m", "4", "--seed", "3",
                         "--out", str(out)]) == 0
        assert read_all(out_a) == read_all(out_b)

    def test_missing_tsplib_is_input_error(self, tmp_path, capsys):
        assert main(["gen", "--tsplib", str(tmp_path / "nope.tsp"),
                     "--k", "1", "--m", "2", "--seed", "0",
                     "--out", str(tmp_path)]) == 2

    def test_bad_k_list(self, tmp_path):
        assert main(["gen", "--tsplib", data_path("burma14.tsp"),
                     "--k", "one", "--m", "2", "--seed", "0",
                     "--out", str(tmp_path)]) == 2


class TestBuild:
    def test_location_counts_line(self, golden_path, tmp_path, capsys):
        lp = tmp_path / "m.lp"
        assert main(["build", "--instance", golden_path,
                     "--formulation", "loc", "--lp", str(lp)]) == 0
        assert capsys.readouterr().out.strip() == "vars=50 rows=73"
        assert lp.read_text().startswith("Maximize")

    def test_request_counts_line(self, golden_path, tmp_path, capsys):
        lp = tmp_path / "m.lp"
        assert main(["build", "--instance", golden_path,
                     "--formulation", "request", "--lp", str(lp)]) == 0
        v, r = predicted_counts_request(3, 2)
        assert capsys.readouterr().out.strip() == f"vars={v} rows={r}"

    def test_unreadable_instance(self, tmp_path):
        assert main(["build", "--instance", str(tmp_path / "x.instance"),
                     "--formulation", "loc", "--lp", str(tmp_path / "m.lp")]) == 2


class TestSolveValidate:
    def test_solve_writes_solution(self, golden_path, tmp_path, capsys):
        out = tmp_path / "sol.json"
        code = main(["solve", "--instance", golden_path, "--formulation", "loc",
                     "--solver", HIGHS_TEMPLATE, "--time-limit", "60",
                     "--out", str(out)])
        assert code == 0
        printed = capsys.readouterr().out
        assert "status=Optimal" in printed and "objective=14.000000" in printed
        doc = json.loads(out.read_text())
        assert {p["truck"] for p in doc["plans"]} == {0, 1}

    def test_validate_clean(self, golden_path, tmp_path, capsys):
        sol = tmp_path / "sol.json"
        sol.write_text(json.dumps({"plans": [
            {"truck": 0, "delivery": [0, 1], "route": [0, 1, 2, 3, 0]},
            {"truck": 1, "delivery": [2], "route": [0, 2, 3, 0]}]}))
        assert main(["validate", "--instance", golden_path,
                     "--solution", str(sol)]) == 0
        printed = capsys.readouterr().out
        assert "xi=11" in printed and "valid" in printed

    def test_validate_duplicate_assignment(self, golden_path, tmp_path, capsys):
        sol = tmp_path / "sol.json"
        sol.write_text(json.dumps({"plans": [
            {"truck": 0, "delivery": [2], "route": [0, 2, 3, 0]},
            {"truck": 1, "delivery": [2], "route": [0, 2, 3, 0]}]}))
        assert main(["validate", "--instance", golden_path,
                     "--solution", str(sol)]) == 3
        assert "DuplicateAssignment" in capsys.readouterr().out

    def test_solve_requires_solver(self, golden_path, monkeypatch):
        monkeypatch.delenv("PPDSP_SOLVER_CMD", raising=False)
        assert main(["solve", "--instance", golden_path,
                     "--formulation", "loc"]) == 2

    def test_solver_from_environment(self, golden_path, monkeypatch, capsys):
        monkeypatch.setenv("PPDSP_SOLVER_CMD", HIGHS_TEMPLATE)
        assert main(["solve", "--instance", golden_path,
                     "--formulation", "req", "--time-limit", "60"]) == 0
        assert "status=Optimal" in capsys.readouterr().out


class TestOracleCmd:
    def test_golden(self, golden_path, capsys):
        assert main(["oracle", "--instance", golden_path]) == 0
        printed = capsys.readouterr().out
        assert "optimal value: 11" in printed
        assert "truck 0: delivery={r0,r1} route=0->1->2->3->0" in printed

    def test_netted_rule(self, golden_path, capsys):
        assert main(["oracle", "--instance", golden_path,
                     "--capacity-rule", "netted"]) == 0
        assert "optimal value: 14" in capsys.readouterr().out


class TestBenchReport:
    def test_encode_only_csv_and_report(self, tmp_path, capsys):
        csv_path = tmp_path / "bench.csv"
        code = main(["bench", "--tsplib", data_path("burma14.tsp"),
                     "--k", "1", "--m", "2", "--solver", "none",
                     "--csv", str(csv_path)])
        assert code == 0
        text = csv_path.read_text()
        assert "burma14,1,2,7,location,458,1041,EncodeOnly" in text
        assert "burma14,1,2,7,request,576,1027,EncodeOnly" in text
        capsys.readouterr()
        report = tmp_path / "report.md"
        assert main(["report", "--csv", str(csv_path), "--solver-label", "none",
                     "--out", str(report)]) == 0
        assert "Obj. [none]" in report.read_text()

    def test_bench_rerun_identical(self, tmp_path, capsys):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for p in paths:
            assert main(["bench", "--tsplib", data_path("ulysses16.tsp"),
                         "--k", "1,2", "--m", "2,4", "--solver", "none",
                         "--csv", str(p)]) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()
