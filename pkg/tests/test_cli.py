"""End-to-end CLI: exit-code contract and exact JSON I/O."""
import json

import pytest

from espp import cli, core


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def ex39(tmp_path):
    path = tmp_path / "ex39.json"
    path.write_text(core.instance_to_json(39, 13, (2,) * 9 + (3, 3)))
    return str(path)


@pytest.fixture
def ex208(tmp_path):
    path = tmp_path / "ex208.json"
    path.write_text(json.dumps(
        {"n": 208, "k": 76, "blocks": [[2, 64], [3, 2], [4, 4]]}))
    return str(path)


class TestSlackValidate:
    def test_slack_39(self, capsys, ex39):
        code, out, _ = run(capsys, "slack", "--instance", ex39)
        assert code == 0
        obj = json.loads(out)
        assert obj["slack"] == 0
        assert obj["block_end_slacks"]["9"] == 9
        assert obj["block_end_slacks"]["11"] == 0

    def test_validate_ok(self, capsys, ex39):
        code, out, _ = run(capsys, "validate", "--instance", ex39)
        assert code == 0 and json.loads(out)["valid"]

    def test_validate_rejects_with_witness(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(core.instance_to_json(4, 2, (1, 3)))
        code, out, _ = run(capsys, "validate", "--instance", str(path))
        obj = json.loads(out)
        assert code == 1 and not obj["valid"]
        assert obj["condition"] == "slack" and obj["value"] == -1

    def test_usage_error_exit_1(self, capsys):
        with pytest.raises(SystemExit) as err:
            cli.main(["slack"])
        assert err.value.code == 1


class TestFluidCommands:
    def test_solve_and_verify_round_trip(self, capsys, tmp_path):
        inst = tmp_path / "i.json"
        inst.write_text(core.instance_to_json(4, 2, (2, 2)))
        code, out, _ = run(capsys, "solve-fluid", "--instance", str(inst))
        assert code == 0
        plan = tmp_path / "plan.json"
        plan.write_text(out)
        code, out, _ = run(capsys, "verify-plan", "--instance", str(inst),
                           "--plan", str(plan))
        assert code == 0 and json.loads(out)["valid"]

    def test_verify_rejects_perturbed(self, capsys, tmp_path):
        inst = tmp_path / "i.json"
        inst.write_text(core.instance_to_json(4, 2, (2, 2)))
        code, out, _ = run(capsys, "solve-fluid", "--instance", str(inst))
        rows = json.loads(out)
        rows[0][0] = "1/1000000"
        plan = tmp_path / "plan.json"
        plan.write_text(json.dumps(rows))
        code, out, _ = run(capsys, "verify-plan", "--instance", str(inst),
                           "--plan", str(plan))
        assert code == 0 and not json.loads(out)["valid"]


class TestCriteriaCommand:
    def test_case2_fixture(self, capsys, ex208):
        code, out, _ = run(capsys, "check-criteria", "--instance", ex208)
        assert code == 0
        cert = json.loads(out)["certificate"]
        assert cert["criterion"] == "C3_CaseII"

    def test_no_certificate(self, capsys, tmp_path):
        path = tmp_path / "i.json"
        path.write_text(core.instance_to_json(3, 2, (1, 2)))
        code, out, _ = run(capsys, "check-criteria", "--instance", str(path))
        assert code == 0 and json.loads(out)["certificate"] is None


class TestFamilyCommands:
    def test_gen_family_certified(self, capsys):
        code, out, _ = run(capsys, "gen-family", "--a", "7/3", "--count", "3")
        assert code == 0
        obj = json.loads(out)
        assert obj["feasible"] and len(obj["instances"]) == 3
        for member in obj["instances"]:
            assert member["report"]["criterion"] == "C1"

    def test_gen_family_infeasible(self, capsys):
        code, out, _ = run(capsys, "gen-family", "--a", "24/7")
        assert code == 0 and not json.loads(out)["feasible"]

    def test_region_grid_csv(self, capsys):
        code, out, _ = run(capsys, "region-grid", "--a", "3.2",
                           "--resolution", "40")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "u,v,in_S1,in_S2"
        assert len(lines) == 1 + 41 * 41
        assert all(line.count(",") == 3 for line in lines[1:])


class TestSolveLinearCommand:
    def test_solved(self, capsys):
        code, out, _ = run(capsys, "solve-linear", "--alphas", "1/4,1/4,1/2",
                           "--n", "120", "--seed", "42")
        assert code == 0
        obj = json.loads(out)
        assert obj["outcome"] == "Solved"
        sets = [set(p) for p in obj["partition"]]
        assert sorted(len(p) for p in sets) == [30, 30, 60]
        assert all(sum(p) == 120 * 121 // 6 for p in sets)


class TestBruteCommand:
    def test_solution_exit_0(self, capsys, tmp_path):
        path = tmp_path / "i.json"
        path.write_text(core.instance_to_json(12, 3, (3, 4, 5)))
        code, out, _ = run(capsys, "brute", "--instance", str(path))
        assert code == 0 and json.loads(out)["status"] == "solution"

    def test_budget_exit_2(self, capsys, tmp_path):
        inc = core.validate_incomplete(39, 13, (2,) * 9 + (3, 3))
        inst = core.complete_incomplete(inc)
        path = tmp_path / "i.json"
        path.write_text(core.instance_to_json(inst.n, inst.k, inst.parts))
        code, out, _ = run(capsys, "brute", "--instance", str(path),
                           "--budget", "10")
        assert code == 2 and json.loads(out)["status"] == "budget_exceeded"


class TestScanCommand:
    def test_scan_jsonl_and_summary(self, capsys, tmp_path):
        out_path = tmp_path / "recs.jsonl"
        code, out, _ = run(capsys, "scan", "--n-max", "60",
                           "--out", str(out_path))
        assert code == 0
        summary = json.loads(out)
        assert summary["total"] == 6
        lines = out_path.read_text().strip().splitlines()
        assert len(lines) == 6
        for line in lines:
            obj = json.loads(line)  # every emitted line re-parses
            assert obj["report"]["criterion"].startswith("C3_")
