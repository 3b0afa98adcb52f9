"""Exact arithmetic core for equal-sum partitioning of {1..n}.

A composition [p_1 <= ... <= p_k] of n prescribes part sizes for splitting
{1, ..., n} into k subsets with equal element sums s = n(n+1)/(2k).  The
central feasibility functional is the slack: for each prefix of the j
smallest parts, placing the largest available elements into them must meet
or exceed j*s,

    slack_j = sum_{i=1}^{P_j} (n - i + 1) - j*s,   P_j = p_1 + ... + p_j,

and slack = min_j slack_j (index k excluded for complete compositions --
it is identically 0 by conservation -- and included for incomplete ones).
All quantities are exact integers or `fractions.Fraction`; no floats.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

Rational = Fraction


class EsppError(Exception):
    """Base class for all errors raised by this package."""


class NonIntegralTarget(EsppError):
    """k does not divide n(n+1)/2."""


class IndexOutOfRange(EsppError):
    """Slack index outside the applicable range."""


class InvalidAlphaVector(EsppError):
    """Alpha vector not non-descending positive with sum 1."""


class CompletionViolatesSlack(EsppError):
    """A constructed completion failed the slack condition (unexpected)."""


@dataclass(frozen=True)
class Rejection:
    """First violated validity condition, with a witness.

    condition: one of 'divisibility', 'positivity', 'monotonicity', 'sum',
    'length', 'completability', 'slack'.  For 'slack' the witness is the
    violating index j and the slack value there.
    """

    condition: str
    index: int | None = None
    value: int | None = None

    def message(self) -> str:
        if self.condition == "slack":
            return f"slack violated at index {self.index}: {self.value}"
        if self.index is not None:
            return f"{self.condition} violated at index {self.index}"
        return f"{self.condition} violated"


class ValidationError(EsppError):
    def __init__(self, rejection: Rejection):
        super().__init__(rejection.message())
        self.rejection = rejection


def rat_to_str(x: Fraction | int) -> str:
    """Serialize a rational as 'p' or 'p/q' (exact, lowest terms)."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def rat_from_str(s: str) -> Fraction:
    """Parse 'p' or 'p/q'. Rejects floats by construction."""
    return Fraction(s.strip())


def target_sum(n: int, k: int) -> int:
    """The common subset sum s^{n,k} = n(n+1)/(2k)."""
    if n < 1 or k < 1:
        raise NonIntegralTarget(f"n={n}, k={k} must be positive")
    total = n * (n + 1) // 2
    if total % k:
        raise NonIntegralTarget(f"k={k} does not divide n(n+1)/2={total}")
    return total // k


def sum_of_largest(n: int, count: int) -> int:
    """sum_{i=1}^{count} (n - i + 1): the count largest elements of {1..n}."""
    if count < 0 or count > n:
        raise IndexOutOfRange(f"count={count} outside [0, {n}]")
    return count * (2 * n - count + 1) // 2


def slack_at(parts, n: int, k: int, j: int) -> int:
    """slack_j for the prefix of the j smallest parts (exact, closed form)."""
    if not 1 <= j <= len(parts):
        raise IndexOutOfRange(f"j={j} outside [1, {len(parts)}]")
    s = target_sum(n, k)
    pj = sum(parts[:j])
    if pj > n:
        raise IndexOutOfRange(f"prefix sum {pj} exceeds n={n}")
    return sum_of_largest(n, pj) - j * s


def block_end_indices(parts) -> list[int]:
    """1-based indices j where p_j is the last part of its size."""
    ends = []
    for j in range(1, len(parts) + 1):
        if j == len(parts) or parts[j] != parts[j - 1]:
            ends.append(j)
    return ends


def _slack_min(parts, n: int, k: int, last: int) -> int:
    """min slack_j over 1 <= j <= last, evaluated at block boundaries.

    Within a block the increments slack_j - slack_{j-1} strictly decrease
    (equal part sizes, strictly smaller elements), so the sequence is
    concave on each block and its minimum over any index range lies on a
    block start or end.  (Evaluating ends alone is enough to decide the
    sign, but can overstate the minimum when the first block ascends.)
    Test builds cross-check against the naive full minimum.
    """
    ends = block_end_indices(parts)
    cand = {1, last}
    for j in ends:
        if j <= last:
            cand.add(j)
        if j + 1 <= last:
            cand.add(j + 1)  # start of the next block
    m = min(slack_at(parts, n, k, j) for j in sorted(cand))
    assert m == min(slack_at(parts, n, k, j) for j in range(1, last + 1))
    return m


def parts_to_blocks(parts) -> tuple[tuple[int, int], ...]:
    """Run-length encode a non-descending composition as ((size, mult), ...)."""
    blocks: list[list[int]] = []
    for p in parts:
        if blocks and blocks[-1][0] == p:
            blocks[-1][1] += 1
        else:
            blocks.append([p, 1])
    return tuple((q, e) for q, e in blocks)


def blocks_to_parts(blocks) -> tuple[int, ...]:
    parts: list[int] = []
    for q, e in blocks:
        parts.extend([int(q)] * int(e))
    return tuple(parts)


@dataclass(frozen=True)
class Composition:
    """A non-descending composition p_1 <= ... <= p_k of n = sum p_i."""

    parts: tuple[int, ...]

    def __post_init__(self):
        if not self.parts:
            raise ValidationError(Rejection("length"))
        for i, p in enumerate(self.parts):
            if p < 1:
                raise ValidationError(Rejection("positivity", index=i + 1))
            if i and p < self.parts[i - 1]:
                raise ValidationError(Rejection("monotonicity", index=i + 1))
        object.__setattr__(self, "parts", tuple(int(p) for p in self.parts))

    @property
    def n(self) -> int:
        return sum(self.parts)

    @property
    def k(self) -> int:
        return len(self.parts)

    def blocks(self) -> tuple[tuple[int, int], ...]:
        return parts_to_blocks(self.parts)

    @classmethod
    def from_blocks(cls, blocks) -> "Composition":
        return cls(blocks_to_parts(blocks))


@dataclass(frozen=True)
class EsppInstance:
    """A validated instance: composition plus integral target, slack >= 0."""

    composition: Composition
    n: int
    k: int
    target: int

    @property
    def parts(self) -> tuple[int, ...]:
        return self.composition.parts

    def slack(self) -> int:
        # index k is identically 0 by conservation and therefore excluded
        if self.k == 1:
            return 0
        return _slack_min(self.parts, self.n, self.k, self.k - 1)

    def slack_at(self, j: int) -> int:
        if not 1 <= j <= self.k - 1:
            raise IndexOutOfRange(f"j={j} outside [1, {self.k - 1}]")
        return slack_at(self.parts, self.n, self.k, j)


@dataclass(frozen=True)
class IncompleteInstance:
    """A prefix Q of length l < k that can still be completed.

    Validity requires n - sum(Q) >= (k - l) * p_l (room for the remaining
    parts in non-descending order) and slack(Q) >= 0 where the minimum
    includes the last index l.
    """

    prefix: Composition
    n: int
    k: int

    @property
    def parts(self) -> tuple[int, ...]:
        return self.prefix.parts

    @property
    def length(self) -> int:
        return self.prefix.k

    @property
    def target(self) -> int:
        return target_sum(self.n, self.k)

    def slack(self) -> int:
        return _slack_min(self.parts, self.n, self.k, self.length)

    def slack_at(self, j: int) -> int:
        if not 1 <= j <= self.length:
            raise IndexOutOfRange(f"j={j} outside [1, {self.length}]")
        return slack_at(self.parts, self.n, self.k, j)


def _check_block_end_slacks(parts, n: int, k: int, s: int,
                            skip_last_of_k: bool) -> None:
    """Single pass over block ends; raises on the first negative slack."""
    pref = 0
    for j, p in enumerate(parts, 1):
        pref += p
        if j < len(parts) and parts[j] == p:
            continue  # not the last part of its size
        if skip_last_of_k and j == k:
            continue
        v = pref * (2 * n - pref + 1) // 2 - j * s
        if v < 0:
            raise ValidationError(Rejection("slack", index=j, value=v))


def validate_espp(n: int, k: int, parts) -> EsppInstance:
    """Validate (n, k, parts) or raise ValidationError naming the first
    violated condition: divisibility, positivity/monotonicity, sum, slack."""
    total = n * (n + 1) // 2
    if n < 1 or k < 1 or total % k:
        raise ValidationError(Rejection("divisibility"))
    comp = Composition(tuple(parts))
    if comp.k != k:
        raise ValidationError(Rejection("length", index=comp.k))
    if comp.n != n:
        raise ValidationError(Rejection("sum", value=comp.n))
    s = total // k
    _check_block_end_slacks(comp.parts, n, k, s, skip_last_of_k=True)
    return EsppInstance(comp, n, k, s)


def validate_incomplete(n: int, k: int, parts) -> IncompleteInstance:
    """Validate an incomplete instance (prefix of length l < k)."""
    total = n * (n + 1) // 2
    if n < 1 or k < 1 or total % k:
        raise ValidationError(Rejection("divisibility"))
    comp = Composition(tuple(parts))
    l = comp.k
    if not l < k:
        raise ValidationError(Rejection("length", index=l))
    if n - comp.n < (k - l) * comp.parts[-1]:
        raise ValidationError(Rejection("completability", index=l))
    _check_block_end_slacks(comp.parts, n, k, total // k,
                            skip_last_of_k=False)
    return IncompleteInstance(comp, n, k)


def complete_incomplete(inc: IncompleteInstance) -> EsppInstance:
    """Deterministic maximally-balanced completion of an incomplete instance.

    Distributes the remainder r = n - sum(Q) over the k - l missing parts as
    floor(r/(k-l)) and ceil(r/(k-l)), smaller parts first; floor(r/(k-l)) >=
    p_l is guaranteed by the completability condition, so the result stays
    non-descending.
    """
    r = inc.n - inc.prefix.n
    t = inc.k - inc.length
    base, extra = divmod(r, t)
    tail = [base] * (t - extra) + [base + 1] * extra
    parts = inc.parts + tuple(tail)
    try:
        return validate_espp(inc.n, inc.k, parts)
    except ValidationError as exc:
        raise CompletionViolatesSlack(
            f"completion of {inc} failed: {exc.rejection.message()}"
        ) from exc


@dataclass(frozen=True)
class EqualSumPartition:
    """k disjoint subsets of {1..n}, intended to each sum to s^{n,k}."""

    sets: tuple[frozenset[int], ...]

    @classmethod
    def from_lists(cls, lists) -> "EqualSumPartition":
        return cls(tuple(frozenset(int(x) for x in part) for part in lists))


def verify_partition(inst: EsppInstance, sol: EqualSumPartition) -> bool:
    """True iff sol is a disjoint cover of {1..n} with the prescribed part
    sizes, each part summing to the target.  Pure predicate, never raises."""
    if len(sol.sets) != inst.k:
        return False
    sizes = sorted(len(p) for p in sol.sets)
    if sizes != sorted(inst.parts):
        return False
    seen: set[int] = set()
    for part in sol.sets:
        if sum(part) != inst.target:
            return False
        if seen & part:
            return False
        seen |= part
    return seen == set(range(1, inst.n + 1))


def slack_alphas(alphas) -> Fraction | None:
    """Limit slack of a linear family: min_{1<=j<k} A_j(1 - A_j/2) - j/(2k).

    `alphas` must be non-descending positive rationals summing to 1.  For
    k = 1 there is no constrained index and None is returned.
    """
    a = [Fraction(x) for x in alphas]
    k = len(a)
    if k < 1:
        raise InvalidAlphaVector("empty alpha vector")
    for i, x in enumerate(a):
        if x <= 0:
            raise InvalidAlphaVector(f"alpha_{i + 1} = {x} <= 0")
        if i and x < a[i - 1]:
            raise InvalidAlphaVector("alphas not non-descending")
    if sum(a) != 1:
        raise InvalidAlphaVector(f"sum(alphas) = {sum(a)} != 1")
    if k == 1:
        return None
    best: Fraction | None = None
    acc = Fraction(0)
    for j in range(1, k):
        acc += a[j - 1]
        v = acc * (1 - acc / 2) - Fraction(j, 2 * k)
        if best is None or v < best:
            best = v
    return best


# --- canonical JSON wire format -------------------------------------------
#
# {"n": int, "k": int, "parts": [int, ...]}; block form accepted on input as
# {"n": int, "k": int, "blocks": [[size, mult], ...]}.  Integers only.


def instance_to_json(n: int, k: int, parts) -> str:
    return json.dumps({"n": n, "k": k, "parts": [int(p) for p in parts]})


def instance_from_json(text: str) -> tuple[int, int, tuple[int, ...]]:
    obj = json.loads(text)
    n = int(obj["n"])
    k = int(obj["k"])
    if "parts" in obj:
        parts = tuple(int(p) for p in obj["parts"])
    elif "blocks" in obj:
        parts = blocks_to_parts(obj["blocks"])
    else:
        raise ValidationError(Rejection("length"))
    return n, k, parts
