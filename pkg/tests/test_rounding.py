"""Randomized rounding: sampling, repairs, end-to-end runs."""
import random
from fractions import Fraction as F

import pytest

from espp import core, rounding
from espp.rounding import LinearFamily, SplitMix64


FAM3 = LinearFamily.from_alphas([F(1, 4), F(1, 4), F(1, 2)])
FAM2 = LinearFamily.from_alphas([F(1, 2), F(1, 2)])


class TestFamily:
    def test_requires_positive_slack(self):
        with pytest.raises(ValueError):
            LinearFamily.from_alphas([F(1, 6), F(1, 3), F(1, 2)])

    def test_trivial_family_allowed(self):
        assert LinearFamily.from_alphas([F(1)]).slack_value is None


class TestAdmissible:
    def test_quarter_quarter_half(self):
        got = rounding.admissible_n(FAM3, range(1, 21))
        assert 12 in got
        assert got == [8, 12, 20]

    def test_half_half(self):
        assert rounding.admissible_n(FAM2, range(1, 11)) == [4, 8]

    def test_empty(self):
        fam = LinearFamily.from_alphas([F(1, 3), F(1, 3), F(1, 3)])
        assert rounding.admissible_n(fam, range(1, 3)) == []


class TestRng:
    def test_deterministic(self):
        a, b = SplitMix64(7), SplitMix64(7)
        assert [a.next_u64() for _ in range(5)] == \
            [b.next_u64() for _ in range(5)]

    def test_known_advance(self):
        rng = SplitMix64(0)
        first = rng.next_u64()
        assert 0 <= first < 1 << 64
        assert SplitMix64(0).next_u64() == first


class TestSamplingMarginals:
    def test_empirical_matches_plan_within_4_se(self):
        n, runs = 60, 10000
        thresholds, plan = rounding._plan_rows(FAM3.alphas, n)
        counts = [[0] * plan.k for _ in range(n)]
        rng = SplitMix64(2)
        for _ in range(runs):
            for i, j in enumerate(rounding._sample_assignment(thresholds,
                                                              rng)):
                counts[i][j] += 1
        for i in range(n):
            for j in range(plan.k):
                p = float(plan.x[i][j])
                se = (p * (1 - p) / runs) ** 0.5
                emp = counts[i][j] / runs
                assert abs(emp - p) <= 4 * se + 1e-12, (i, j, emp, p)

    def test_zero_probability_never_selected(self):
        n = 24
        thresholds, plan = rounding._plan_rows(FAM3.alphas, n)
        rng = SplitMix64(5)
        for _ in range(2000):
            for i, j in enumerate(rounding._sample_assignment(thresholds,
                                                              rng)):
                assert plan.x[i][j] > 0


class TestSizeRepair:
    def test_already_correct(self):
        sets = [{1, 4}, {2, 3}]
        assert rounding.size_repair(sets, [2, 2], 5) == 0

    def test_one_misplaced(self):
        sets = [{1, 2, 4}, {3}]
        assert rounding.size_repair(sets, [2, 2], 5) == 1
        assert sorted(map(len, sets)) == [2, 2]

    def test_iteration_count_is_half_deviation_sum(self):
        rng = random.Random(99)
        for _ in range(200):
            n = rng.randint(6, 40)
            k = rng.randint(2, 5)
            targets = [1] * k
            for _ in range(n - k):
                targets[rng.randrange(k)] += 1
            sets = [set() for _ in range(k)]
            for x in range(1, n + 1):
                sets[rng.randrange(k)].add(x)
            # sampled configurations can leave a target empty; that's fine
            dev = sum(abs(len(sets[j]) - targets[j]) for j in range(k))
            iters = rounding.size_repair(sets, targets, n)
            assert iters == dev // 2
            assert [len(q) for q in sets] == targets


class TestSumRepair:
    def test_already_equal(self):
        sets = [{1, 4}, {2, 3}]
        outcome, deltas = rounding.sum_repair(sets, 5)
        assert outcome == "Solved" and deltas == []

    def test_single_swap(self):
        sets = [{2, 4}, {1, 3}]  # sums 6 and 4, target 5
        outcome, deltas = rounding.sum_repair(sets, 5)
        assert outcome == "Solved" and len(deltas) == 1

    def test_failure_when_no_pair(self):
        sets = [{3}, {1}]  # sums 3 and 1: delta=1 but the only pair gap is 2
        outcome, _ = rounding.sum_repair(sets, 2)
        assert outcome == "Failure"

    def test_monotone_deviation_no_zero_crossing(self):
        rng = random.Random(123)
        for _ in range(100):
            n, k = 24, 3
            if (n * (n + 1)) % (2 * k):
                continue
            s = n * (n + 1) // (2 * k)
            elems = list(range(1, n + 1))
            rng.shuffle(elems)
            sets = [set(elems[:8]), set(elems[8:16]), set(elems[16:])]
            sums0 = [sum(q) for q in sets]
            signs0 = [0 if v == s else (1 if v > s else -1) for v in sums0]
            prev_max = max(abs(v - s) for v in sums0)
            work = [set(q) for q in sets]
            while True:
                sums = [sum(q) for q in work]
                cur = max(abs(v - s) for v in sums)
                assert cur <= prev_max
                for j, v in enumerate(sums):
                    if signs0[j] > 0:
                        assert v >= s
                    elif signs0[j] < 0:
                        assert v <= s
                prev_max = cur
                if all(v == s for v in sums):
                    break
                outcome, deltas = rounding.sum_repair(work, s, max_iters=1)
                if outcome == "Failure" and not deltas:
                    break


class TestPairCounts:
    def test_enumerated_example(self):
        counts = rounding.pair_counts([{2, 4}, {1, 3}], 1)
        assert counts[(0, 1, 1)] == 2  # (2,1) and (4,3)

    def test_disjoint_ranges(self):
        counts = rounding.pair_counts([{20, 21}, {1, 2}], 5)
        assert all(counts[(0, 1, d)] == 0 for d in range(1, 6))

    def test_sampled_run_rich_pair_counts(self):
        # fitted constants: Delta <= n/10 and R >= n/50 over a sampled run
        n = 404
        thresholds, _ = rounding._plan_rows(FAM3.alphas, n)
        rng = SplitMix64(77)
        xs = rounding._sample_assignment(thresholds, rng)
        sets = [set() for _ in range(3)]
        for i, j in enumerate(xs):
            sets[j].add(n - i)
        counts = rounding.pair_counts(sets, n // 10)
        worst = min(counts.values())
        assert worst >= n // 50


class TestSolveLinear:
    def test_half_half_n4(self):
        run = rounding.solve_linear(FAM2, 4, seed=3)
        assert run.outcome == "Solved"
        assert sorted(sorted(p) for p in run.partition.sets) == \
            [[1, 4], [2, 3]]

    def test_quarter_family_n12_any_seed(self):
        inst = core.validate_espp(12, 3, (3, 3, 6))
        for seed in range(10):
            run = rounding.solve_linear(FAM3, 12, seed=seed)
            assert run.outcome == "Solved"
            assert core.verify_partition(inst, run.partition)
            assert sorted(len(p) for p in run.partition.sets) == [3, 3, 6]

    def test_trivial_k1(self):
        fam = LinearFamily.from_alphas([F(1)])
        run = rounding.solve_linear(fam, 7, seed=0)
        assert run.outcome == "Solved"
        assert run.iter1 == run.iter2 == 0
        assert run.partition.sets[0] == frozenset(range(1, 8))

    def test_deterministic_given_seed(self):
        r1 = rounding.solve_linear(FAM3, 120, seed=11)
        r2 = rounding.solve_linear(FAM3, 120, seed=11)
        assert r1 == r2

    def test_inadmissible_n_rejected(self):
        with pytest.raises(ValueError):
            rounding.solve_linear(FAM3, 13, seed=0)

    def test_iter1_equals_half_size_deviation(self):
        for seed in range(20):
            run = rounding.solve_linear(FAM3, 120, seed=seed, max_retries=0)
            if run.outcome == "Solved":
                assert run.iter1 == run.size_dev_sum // 2
