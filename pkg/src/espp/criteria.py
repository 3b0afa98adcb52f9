"""Arithmetic certificates of unsolvability.

Both criteria exploit the same scarcity argument: parts of size 2 must be
filled with pairs {x, s-x} drawn from the big-element pool C = [s-n, n],
leaving u = |C| - 2d spare big elements; parts beyond index d+u must then
be filled entirely from the small pool [m] = [1, s-n-1], and

  Case I :  maxSum(p_{d+u+1} + ... + p_{d+u+i}, [m]) <  i*s
  Case II:  equality above, and the spare elements force one of the sets
            d+1..d+e (e = ceil((u+1)/2)) to complement a big element
            <= s/2 from leftovers worth less than s/2:
            maxSum(p_{d+e} - 1, [m - sum]) < s/2

certify unsolvability of every completion.  Case II additionally needs a
spare big element to exist (u >= 1): with u = 0 the literal inequalities
can hold on solvable instances.  All comparisons are exact; s/2 is handled
as 2*lhs < s to avoid parity branches.

The first criterion is the two-block special case: for [2^e, d^f] with
c = s - n and h = 2(n-e) - s + 1, unsolvability follows from f > h and
sum_{i=c-d(f-h)}^{c-1} i < (f-h)*s.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .core import EsppError, IncompleteInstance, parts_to_blocks


class WrongShape(EsppError):
    """Input composition does not match the criterion's required shape."""


class InvalidRange(EsppError):
    """max_sum called with a count outside [0, m]."""


def max_sum(count: int, m: int) -> int:
    """Sum of the `count` largest elements of {1..m}, closed form."""
    if count < 0 or count > m:
        raise InvalidRange(f"count={count} outside [0, {m}]")
    return count * (2 * m - count + 1) // 2


@dataclass(frozen=True)
class CriterionReport:
    """A firing certificate.

    criterion is one of 'C1', 'C3_CaseI', 'C3_CaseII'.  lhs/rhs are the two
    sides of the deciding strict inequality (lhs < rhs), exact integers;
    witness carries every intermediate quantity needed to re-derive the
    verdict.  truncated records whether an incomplete prefix cut the scan
    range of the index i.
    """

    criterion: str
    lhs: int
    rhs: int
    witness: dict = field(default_factory=dict)
    truncated: bool = False

    def holds(self) -> bool:
        """Re-evaluate the cited inequality from the stored sides."""
        return self.lhs < self.rhs

    def to_json(self) -> str:
        return json.dumps({
            "criterion": self.criterion,
            "lhs": str(self.lhs),
            "rhs": str(self.rhs),
            "truncated": self.truncated,
            "witness": {key: str(val) for key, val in self.witness.items()},
        })


def _instance_fields(inst):
    n, k = inst.n, inst.k
    parts = inst.parts
    s = inst.target
    return n, k, s, parts


def criterion1(inst: IncompleteInstance) -> CriterionReport | None:
    """Two-block certificate for prefixes [2^e, d^f] with d >= 3."""
    n, k, s, parts = _instance_fields(inst)
    blocks = parts_to_blocks(parts)
    if len(blocks) != 2 or blocks[0][0] != 2 or blocks[1][0] < 3:
        raise WrongShape(f"prefix is not [2^e, d^f] with d >= 3: {blocks}")
    (_, e), (d, f) = blocks
    c = s - n
    h = 2 * (n - e) - s + 1
    if f <= h:
        return None
    lo = c - d * (f - h)
    hi = c - 1
    lhs = (lo + hi) * (hi - lo + 1) // 2
    rhs = (f - h) * s
    if lhs < rhs:
        return CriterionReport(
            "C1", lhs, rhs,
            witness={"e": e, "d": d, "f": f, "c": c, "h": h, "s": s, "n": n,
                     "k": k},
        )
    return None


def criterion3(inst) -> CriterionReport | None:
    """Certificate for compositions starting [2^d, ...]; complete or
    incomplete.  For incomplete input, only indices d+u+i inside the known
    prefix are examined; the report records the truncation."""
    n, k, s, parts = _instance_fields(inst)
    l = len(parts)
    if parts[0] != 2:
        raise WrongShape("composition does not start with a 2-block")
    d = 0
    while d < l and parts[d] == 2:
        d += 1
    u = 2 * n - s + 1 - 2 * d
    e = (u + 2) // 2  # ceil((u+1)/2)
    m = s - n - 1
    if u < 0 or m < 0:
        return None
    i_max_theorem = k - d - u
    i_max = min(i_max_theorem, l - d - u)
    truncated = i_max < i_max_theorem
    total = 0
    for i in range(1, i_max + 1):
        total += parts[d + u + i - 1]
        if total > m:
            break  # such parts cannot even be filled from [m]; see ledger
        ms = max_sum(total, m)
        if ms < i * s:
            return CriterionReport(
                "C3_CaseI", ms, i * s,
                witness={"i": i, "d": d, "u": u, "e": e, "m": m, "s": s,
                         "sizes": total, "n": n, "k": k},
                truncated=truncated,
            )
        if ms == i * s and u >= 1:
            pde = parts[d + e - 1]
            rest = m - total
            if pde - 1 > rest:
                sec = -1  # cannot fill the set at all: fires a fortiori
            else:
                sec = max_sum(pde - 1, rest)
            if 2 * sec < s:
                return CriterionReport(
                    "C3_CaseII", 2 * sec, s,
                    witness={"i": i, "d": d, "u": u, "e": e, "m": m, "s": s,
                             "sizes": total, "p_de": pde,
                             "equal_lhs": ms, "equal_rhs": i * s,
                             "n": n, "k": k},
                    truncated=truncated,
                )
    return None


def certify_unsolvable(inst) -> CriterionReport | None:
    """First firing certificate in the order C3-I, C3-II, C1.

    Absence of a certificate is NOT a solvability claim.
    """
    parts = inst.parts
    if parts[0] == 2:
        report = criterion3(inst)
        if report is not None:
            return report
    if isinstance(inst, IncompleteInstance):
        blocks = parts_to_blocks(parts)
        if len(blocks) == 2 and blocks[0][0] == 2 and blocks[1][0] >= 3:
            return criterion1(inst)
    return None
