"""Brute-force oracle: outcomes, pruning, the solvability table."""
import pytest

from espp import core, criteria, fluid, oracle


class TestBruteSolve:
    def test_trivial_solution(self):
        res = oracle.brute_solve(core.validate_espp(3, 2, (1, 2)))
        assert res.status == "solution"
        assert core.verify_partition(core.validate_espp(3, 2, (1, 2)),
                                     res.partition)

    def test_all_singletons_unsolvable(self):
        res = oracle.brute_solve(core.validate_espp(5, 5, (1,) * 5))
        assert res.status == "unsolvable"

    def test_39_13_completion_unsolvable(self):
        inc = core.validate_incomplete(39, 13, (2,) * 9 + (3, 3))
        inst = core.complete_incomplete(inc)
        res = oracle.brute_solve(inst, budget=10 ** 8)
        assert res.status == "unsolvable"
        assert res.stats.elapsed < 60.0

    def test_budget_exceeded_is_distinct(self):
        inc = core.validate_incomplete(39, 13, (2,) * 9 + (3, 3))
        inst = core.complete_incomplete(inc)
        res = oracle.brute_solve(inst, budget=10)
        assert res.status == "budget_exceeded"
        assert res.stats.nodes_expanded > 10

    def test_deterministic(self):
        inst = core.validate_espp(12, 3, (3, 4, 5))
        r1 = oracle.brute_solve(inst)
        r2 = oracle.brute_solve(inst)
        assert r1.partition == r2.partition
        assert r1.stats.nodes_expanded == r2.stats.nodes_expanded


@pytest.fixture(scope="module")
def table12():
    return oracle.exhaustive_solvability_table(12)


class TestTable:

    def test_instance_count_regression_at_12(self, table12):
        at12 = [key for key in table12 if key[0] == 12]
        # frozen from a first run of this enumeration (k | 78, slack >= 0)
        assert len(at12) == 8

    def test_all_k_le_4_solvable_except_triple_singleton(self, table12):
        bad = [key for key, status in table12.items()
               if key[1] <= 4 and status != "solution"]
        # the lone exception: {1},{2},{3} cannot all sum to 2
        assert bad == [(3, 3, (1, 1, 1))]

    def test_slack_zero_k_le_3_solvable(self, table12):
        for (n, k, parts), status in table12.items():
            if k > 3 or (1 in parts):
                continue
            inst = core.validate_espp(n, k, parts)
            if inst.slack() == 0:
                assert status == "solution"

    def test_solution_implies_fluid_solvable(self, table12):
        for (n, k, parts), status in table12.items():
            if status != "solution":
                continue
            pi = fluid.from_espp(core.validate_espp(n, k, parts))
            assert fluid.frac_slack(pi) >= 0
            assert fluid.verify_plan(pi, fluid.solve(pi))

    def test_criteria_never_fire_on_solved(self, table12):
        for (n, k, parts), status in table12.items():
            if status == "solution":
                assert criteria.certify_unsolvable(
                    core.validate_espp(n, k, parts)) is None

    def test_oracle_accepts_exactly_verifier_accepted_outputs(self, table12):
        for (n, k, parts), status in table12.items():
            inst = core.validate_espp(n, k, parts)
            res = oracle.brute_solve(inst)
            if res.status == "solution":
                assert core.verify_partition(inst, res.partition)
            else:
                assert res.partition is None
