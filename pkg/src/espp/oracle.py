"""Pruned brute-force ground truth for small instances.

Elements are assigned largest-first; a part is tracked by its remaining
capacity c and residual sum t.  With x the next element, the pool is
exactly {1..x}, so the bounds

    c(c+1)/2  <=  t  <=  c*x - c(c-1)/2

are sharp and prune most branches.  Two further rules: parts with equal
(capacity, residual) have interchangeable futures, so only the first of
each class is tried (symmetry); and a part with capacity 1 and residual
exactly x must receive x (forced -- in particular a half-filled pair {y}
forces its partner s - y), while two such parts are an immediate dead end.
Dependency-free by design so the search stays auditable.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from multiprocessing import Pool

from .core import (
    EqualSumPartition,
    EsppInstance,
    ValidationError,
    slack_at,
    validate_espp,
)


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    prunes_by_rule: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def bump(self, rule: str) -> None:
        self.prunes_by_rule[rule] = self.prunes_by_rule.get(rule, 0) + 1


@dataclass(frozen=True)
class BruteResult:
    """status: 'solution' | 'unsolvable' | 'budget_exceeded'."""

    status: str
    partition: EqualSumPartition | None
    stats: SearchStats


class _Budget(Exception):
    pass


def brute_solve(inst: EsppInstance, budget: int = 10 ** 9) -> BruteResult:
    """Complete backtracking over assignments of n, n-1, ..., 1 to parts."""
    n, k, s = inst.n, inst.k, inst.target
    caps = list(inst.parts)
    needs = [s] * k
    owner = [0] * (n + 1)
    stats = SearchStats()
    t0 = time.time()

    def feasible(x: int) -> bool:
        for j in range(k):
            c = caps[j]
            t = needs[j]
            if c == 0:
                if t != 0:
                    return False
                continue
            if t < c * (c + 1) // 2 or t > c * x - c * (c - 1) // 2:
                return False
        return True

    def assign(x: int) -> bool:
        if x == 0:
            return all(c == 0 and t == 0 for c, t in zip(caps, needs))
        if not feasible(x):
            stats.bump("bounds")
            return False
        forced = [j for j in range(k) if caps[j] == 1 and needs[j] == x]
        if len(forced) > 1:
            stats.bump("forced_conflict")
            return False
        if forced:
            candidates = forced
        else:
            candidates = []
            seen: set[tuple[int, int]] = set()
            for j in range(k):
                if caps[j] == 0 or needs[j] < x:
                    continue
                key = (caps[j], needs[j])
                if key in seen:
                    stats.bump("symmetry")
                    continue
                seen.add(key)
                candidates.append(j)
        for j in candidates:
            stats.nodes_expanded += 1
            if stats.nodes_expanded > budget:
                raise _Budget
            caps[j] -= 1
            needs[j] -= x
            owner[x] = j
            if assign(x - 1):
                return True
            caps[j] += 1
            needs[j] += x
        return False

    try:
        found = assign(n)
    except _Budget:
        stats.elapsed = time.time() - t0
        return BruteResult("budget_exceeded", None, stats)
    stats.elapsed = time.time() - t0
    if not found:
        return BruteResult("unsolvable", None, stats)
    sets: list[list[int]] = [[] for _ in range(k)]
    for x in range(1, n + 1):
        sets[owner[x]].append(x)
    part = EqualSumPartition.from_lists(sets)
    return BruteResult("solution", part, stats)


def valid_instances(n: int, k_max: int | None = None):
    """All valid EsppInstances (n, k, P): k | n(n+1)/2, slack >= 0."""
    total = n * (n + 1) // 2
    for k in range(1, n + 1):
        if total % k or (k_max is not None and k > k_max):
            continue
        s = total // k

        def gen(prefix, acc):
            l = len(prefix)
            if l == k:
                if acc == n:
                    yield tuple(prefix)
                return
            lo = prefix[-1] if prefix else 1
            rem = n - acc
            hi = rem // (k - l)
            for q in range(lo, hi + 1):
                prefix.append(q)
                # prefix slack is fixed; negative means no valid completion
                if l + 1 == k or slack_at(prefix, n, k, l + 1) >= 0:
                    yield from gen(prefix, acc + q)
                prefix.pop()

        for parts in gen([], 0):
            try:
                yield validate_espp(n, k, parts)
            except ValidationError:
                continue


def _solve_key(args):
    n, k, parts, budget = args
    res = brute_solve(validate_espp(n, k, parts), budget)
    return (n, k, parts), res.status


def exhaustive_solvability_table(n_max: int, k_max: int | None = None,
                                 budget: int = 10 ** 9,
                                 processes: int | None = None):
    """Solvability verdict for every valid instance with n <= n_max.

    Returns {(n, k, parts): status}.  Table construction parallelizes
    across instances; each search is single-threaded.
    """
    jobs = []
    for n in range(1, n_max + 1):
        for inst in valid_instances(n, k_max):
            jobs.append((inst.n, inst.k, inst.parts, budget))
    table: dict = {}
    if processes is not None and processes > 1:
        with Pool(processes) as pool:
            for key, status in pool.imap_unordered(_solve_key, jobs,
                                                   chunksize=64):
                table[key] = status
    else:
        for job in jobs:
            key, status = _solve_key(job)
            table[key] = status
    return table
