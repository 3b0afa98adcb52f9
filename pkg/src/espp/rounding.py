"""Randomized rounding of the fluid solution for linear families.

A linear family fixes non-descending positive rationals alpha_1..alpha_k
summing to 1 with limit slack min_j A_j(1 - A_j/2) - j/(2k) > 0, and
considers instances (n, k, [alpha_1 n, ..., alpha_k n]) for admissible n.
Each element n-i+1 is assigned to a set independently with probabilities
given by row i of the exact fluid transfer plan; two repair loops then fix
the sizes (move an element from an oversized to an undersized set) and the
sums (swap a pair z' > z'' between the extremal sets with
0 < z' - z'' <= min(excess, deficit), largest difference first).  The sum
loop declares Failure when no admissible pair exists; retries re-run with
fresh randomness.  Exponentially small failure probability in n is the
paper-level guarantee; this module records the per-run counters (Iter_1,
Iter_2, swap sizes) that the guarantee constrains.

Sampling draws one 64-bit word per element from a SplitMix64 stream and
compares j/2^64 against exact cumulative thresholds, so runs are exactly
reproducible from (alphas, n, seed) on any platform.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .core import (
    EqualSumPartition,
    EsppError,
    ValidationError,
    slack_alphas,
    validate_espp,
    verify_partition,
)
from .fluid import TransferPlan, from_espp, solve

TWO64 = 1 << 64


class SplitMix64:
    """Seedable 64-bit generator.

    State advance: state = (state + 0x9E3779B97F4A7C15) mod 2^64; output
    mixes z = state through z ^= z >> 30; z *= 0xBF58476D1CE4B9B1;
    z ^= z >> 27; z *= 0x94D049BB133111EB; z ^= z >> 31.
    """

    MASK = TWO64 - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4B9B1) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)


@dataclass(frozen=True)
class LinearFamily:
    """alphas plus the (positive) limit slack; k = 1 is the trivial family."""

    alphas: tuple[Fraction, ...]
    slack_value: Fraction | None

    @classmethod
    def from_alphas(cls, alphas) -> "LinearFamily":
        alphas = tuple(Fraction(x) for x in alphas)
        slack = slack_alphas(alphas)
        if slack is not None and slack <= 0:
            raise ValueError(f"family slack {slack} not positive")
        return cls(alphas, slack)

    @property
    def k(self) -> int:
        return len(self.alphas)


def admissible_n(family: LinearFamily, ns) -> list[int]:
    """n values for which s^{n,k} and every alpha_j * n are integers."""
    out = []
    k = family.k
    for n in ns:
        if (n * (n + 1)) % (2 * k):
            continue
        if all((a * n).denominator == 1 for a in family.alphas):
            out.append(n)
    return out


@dataclass(frozen=True)
class RoundingRun:
    """Outcome of solve_linear: counters, diagnostics and the partition."""

    seed: int
    iter1: int
    iter2: int
    outcome: str  # "Solved" | "Failure"
    partition: EqualSumPartition | None
    attempts: int
    size_dev_sum: int = 0          # sum_j ||Q_j| - alpha_j n| after sampling
    z_initial: int = 0             # max_j |S(Q_j) - s| after size repair
    swap_sizes: tuple[int, ...] = ()   # delta^(l) per sum-repair iteration


@lru_cache(maxsize=32)
def _plan_rows(alphas: tuple[Fraction, ...], n: int):
    """Shared per-(family, n) fluid plan with integer sampling thresholds.

    thresholds[i][j] = ceil(2^64 * sum_{j' <= j} x_{i+1, j'}): comparing a
    64-bit draw against them realizes Pr[X_i = j] = x_{i,j} exactly on the
    2^-64 grid (a draw w selects j iff w/2^64 < c_j and w/2^64 >= c_{j-1}).
    """
    parts = tuple(int(a * n) for a in alphas)
    inst = validate_espp(n, len(alphas), parts)
    plan = solve(from_espp(inst))
    thresholds = []
    for row in plan.x:
        acc = Fraction(0)
        cut = []
        for x in row:
            acc += x
            cut.append(-((-acc.numerator * TWO64) // acc.denominator))
        thresholds.append(tuple(cut))
    return tuple(thresholds), plan


def fluid_plan(family: LinearFamily, n: int) -> TransferPlan:
    return _plan_rows(family.alphas, n)[1]


def _sample_assignment(thresholds, rng: SplitMix64) -> list[int]:
    """One categorical draw per row: X_i = j with Pr = x_{i,j} (exact
    cumulative thresholds on the j/2^64 grid)."""
    xs = []
    for cut in thresholds:
        w = rng.next_u64()
        j = 0
        while j < len(cut) - 1 and w >= cut[j]:
            j += 1
        xs.append(j)
    return xs


def size_repair(sets: list[set[int]], target_sizes, s: int) -> int:
    """Move elements from oversized to undersized sets until all sizes
    match; returns the iteration count (= half the initial deviation sum).

    Moves the element whose removal keeps |S(Q_j') - s| smallest (ties:
    smallest element), from the most oversized set to the most undersized.
    """
    iters = 0
    sums = [sum(q) for q in sets]
    while True:
        dev = [len(sets[j]) - target_sizes[j] for j in range(len(sets))]
        oj = max(range(len(dev)), key=lambda j: (dev[j], -j))
        uj = min(range(len(dev)), key=lambda j: (dev[j], j))
        if dev[oj] <= 0 or dev[uj] >= 0:
            break
        z = min(sets[oj], key=lambda x: (abs(sums[oj] - x - s), x))
        sets[oj].remove(z)
        sets[uj].add(z)
        sums[oj] -= z
        sums[uj] += z
        iters += 1
    return iters


def sum_repair(sets: list[set[int]], s: int,
               max_iters: int | None = None) -> tuple[str, list[int]]:
    """Swap maximal admissible pairs between the extremal sets until all
    sums equal s; returns ("Solved" | "Failure", swap sizes delta^(l))."""
    sums = [sum(q) for q in sets]
    sorted_sets = [sorted(q) for q in sets]
    deltas: list[int] = []
    while any(x != s for x in sums):
        if max_iters is not None and len(deltas) >= max_iters:
            return "Failure", deltas
        jp = max(range(len(sums)), key=lambda j: (sums[j], -j))
        jm = min(range(len(sums)), key=lambda j: (sums[j], j))
        delta = min(sums[jp] - s, s - sums[jm])
        pair = _best_pair(sorted_sets[jp], sorted_sets[jm], delta)
        if pair is None:
            return "Failure", deltas
        zp, zm = pair
        deltas.append(zp - zm)
        for lst, rem, add in ((sorted_sets[jp], zp, zm),
                              (sorted_sets[jm], zm, zp)):
            lst.remove(rem)
            bisect.insort(lst, add)
        sets[jp].remove(zp)
        sets[jp].add(zm)
        sets[jm].remove(zm)
        sets[jm].add(zp)
        sums[jp] -= zp - zm
        sums[jm] += zp - zm
    return "Solved", deltas


def _best_pair(a_sorted, b_sorted, delta: int) -> tuple[int, int] | None:
    """(z', z'') with z' in A, z'' in B, 0 < z' - z'' <= delta, maximizing
    z' - z'' (ties: largest z')."""
    best = None
    for zp in reversed(a_sorted):
        # smallest z'' in B with z'' >= zp - delta and z'' < zp
        idx = bisect.bisect_left(b_sorted, zp - delta)
        if idx < len(b_sorted) and b_sorted[idx] < zp:
            diff = zp - b_sorted[idx]
            if best is None or diff > best[0]:
                best = (diff, zp, b_sorted[idx])
                if diff == delta:
                    break
    if best is None:
        return None
    return best[1], best[2]


def pair_counts(sets, delta_max: int) -> dict[tuple[int, int, int], int]:
    """R_{j',j'',delta} = #{(z', z'') : z' - z'' = delta, z' in Q_{j'},
    z'' in Q_{j''}} for all ordered pairs and 1 <= delta <= delta_max."""
    counts: dict[tuple[int, int, int], int] = {}
    members = [set(q) for q in sets]
    for jp in range(len(sets)):
        for jm in range(len(sets)):
            if jp == jm:
                continue
            for delta in range(1, delta_max + 1):
                c = sum(1 for z in members[jp] if z - delta in members[jm])
                counts[(jp, jm, delta)] = c
    return counts


def solve_linear(family: LinearFamily, n: int, seed: int,
                 max_retries: int = 8) -> RoundingRun:
    """Run the rounding algorithm with retries; see the module docstring.

    A Failure outcome after all retries is reported, not raised.  An
    admissible n whose finite composition violates the integral slack
    condition fails immediately (the fractional relaxation is already
    unsolvable).
    """
    k = family.k
    if (n * (n + 1)) % (2 * k) or \
            any((a * n).denominator != 1 for a in family.alphas):
        raise ValueError(f"n={n} is not admissible for this family")
    s = n * (n + 1) // (2 * k)
    sizes = [int(a * n) for a in family.alphas]
    if k == 1:
        part = EqualSumPartition.from_lists([range(1, n + 1)])
        return RoundingRun(seed, 0, 0, "Solved", part, 1)
    try:
        cums, _ = _plan_rows(family.alphas, n)
    except (ValidationError, EsppError):
        return RoundingRun(seed, 0, 0, "Failure", None, 0)
    last: RoundingRun | None = None
    for attempt in range(max_retries + 1):
        rng = SplitMix64(seed + attempt)
        assignment = _sample_assignment(cums, rng)
        sets: list[set[int]] = [set() for _ in range(k)]
        for i, j in enumerate(assignment):
            sets[j].add(n - i)  # row i (0-based) holds element n - i
        dev = sum(abs(len(sets[j]) - sizes[j]) for j in range(k))
        iter1 = size_repair(sets, sizes, s)
        z0 = max(abs(sum(q) - s) for q in sets)
        outcome, deltas = sum_repair(sets, s)
        if outcome == "Solved":
            part = EqualSumPartition.from_lists(sets)
            assert verify_partition(
                validate_espp(n, k, tuple(sizes)), part)
            return RoundingRun(seed + attempt, iter1, len(deltas), "Solved",
                               part, attempt + 1, dev, z0, tuple(deltas))
        last = RoundingRun(seed + attempt, iter1, len(deltas), "Failure",
                           None, attempt + 1, dev, z0, tuple(deltas))
    return last
