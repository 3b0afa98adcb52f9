"""Fluid mixing: the exact fractional relaxation of equal-sum partitioning.

n source containers (volume u_i > 0, mass a_i >= 0) are poured into k
target containers (volume v_j, mass b_j), both sides ordered by
non-ascending density a_i/u_i resp. b_j/v_j.  A transfer plan x_{i,j} gives
the portion of source i poured into target j and must satisfy

    x_{i,j} >= 0,   sum_j x_{i,j} = 1,
    sum_i u_i x_{i,j} = v_j,   sum_i a_i x_{i,j} = b_j.

Solvability is equivalent to the fractional slack condition

    slack_l = sum_i (a_i/u_i) mu_{i,l} - sum_{j<=l} b_j >= 0,
    mu_{i,l} = max(0, min(u_i, V_l - U_{i-1})),

for l = 1..k-1 (slack_k is identically 0 by conservation).  The solver
reduces the problem by four exact steps -- delete a null source, delete a
null target, merge the first two targets when their densities coincide,
or pour a portion lambda from the first source into the first target --
and lifts the sub-solution back.  Everything is exact rational arithmetic:
the merge guard and the pour case split are equality tests that floating
point cannot decide.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .core import EsppError, EsppInstance, Rational, rat_from_str, rat_to_str


class SlackViolated(EsppError):
    """solve() called on a problem with negative fractional slack."""


class GuardNotSatisfied(EsppError):
    """A reduction step was invoked although its guard condition fails."""


class InternalInvariantBroken(EsppError):
    """A reduction produced an invalid subproblem (never expected)."""


def _as_fracs(xs) -> tuple[Fraction, ...]:
    return tuple(Fraction(x) for x in xs)


@dataclass(frozen=True)
class FluidProblem:
    """(a, u, b, v) with conservation and non-ascending densities.

    u and v are strictly positive except that u_1 = a_1 = 0 and/or
    v_1 = b_1 = 0 are permitted; a null container counts as densest.
    """

    a: tuple[Fraction, ...]
    u: tuple[Fraction, ...]
    b: tuple[Fraction, ...]
    v: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", _as_fracs(self.a))
        object.__setattr__(self, "u", _as_fracs(self.u))
        object.__setattr__(self, "b", _as_fracs(self.b))
        object.__setattr__(self, "v", _as_fracs(self.v))
        if len(self.a) != len(self.u) or len(self.b) != len(self.v):
            raise InternalInvariantBroken("length mismatch")
        if sum(self.a) != sum(self.b) or sum(self.u) != sum(self.v):
            raise InternalInvariantBroken("conservation violated")
        _check_side(self.a, self.u, "source")
        _check_side(self.b, self.v, "target")

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def k(self) -> int:
        return len(self.b)

    @property
    def total_mass(self) -> Fraction:
        return sum(self.b, Fraction(0))

    @property
    def total_volume(self) -> Fraction:
        return sum(self.v, Fraction(0))


def _check_side(mass, vol, which: str) -> None:
    for i, (m, w) in enumerate(zip(mass, vol)):
        if m < 0 or w < 0:
            raise InternalInvariantBroken(f"negative {which} entry {i}")
        if w == 0:
            if i != 0 or m != 0:
                raise InternalInvariantBroken(
                    f"null {which} container allowed only at index 1")
    # densities non-ascending; a null first container is densest by fiat
    for i in range(len(vol) - 1):
        if vol[i] == 0:
            continue
        if vol[i + 1] == 0:
            raise InternalInvariantBroken(
                f"null {which} container allowed only at index 1")
        if mass[i] * vol[i + 1] < mass[i + 1] * vol[i]:
            raise InternalInvariantBroken(f"{which} densities ascend at {i}")


@dataclass(frozen=True)
class TransferPlan:
    """Row-stochastic n x k matrix of poured portions."""

    x: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(_as_fracs(r) for r in self.x))

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def k(self) -> int:
        return len(self.x[0]) if self.x else 0


@dataclass(frozen=True)
class SolutionStructure:
    """Skeleton (I_j, gamma_j) of a solve() run with positive slack.

    first_rows holds (I_1, ..., I_k, I_{k+1}=n+1) with I_j the first row
    index (1-based) whose entry in column j is positive; gammas holds
    (gamma_0=0, gamma_1, ..., gamma_{k-1}), gamma_j being the merge ratio
    recorded when the merged subproblem had exactly k - j targets.
    """

    first_rows: tuple[int, ...]
    gammas: tuple[Fraction, ...]


@dataclass(frozen=True)
class RobustnessReport:
    epsilon: Fraction
    slack_margin: bool      # slack(pi) > eps * M
    mass_margins: bool      # b_j > eps * M for all j
    volume_margins: bool    # v_j > eps * V for all j
    density_margin: bool    # M/V > eps * a_1/u_1
    total_mass: Fraction
    total_volume: Fraction

    @property
    def robust(self) -> bool:
        return (self.slack_margin and self.mass_margins
                and self.volume_margins and self.density_margin)


def from_espp(inst: EsppInstance) -> FluidProblem:
    """The fractional relaxation: a_i = n-i+1, u_i = 1, b_j = s, v_j = p_j."""
    n, s = inst.n, inst.target
    return FluidProblem(
        a=tuple(Fraction(n - i + 1) for i in range(1, n + 1)),
        u=tuple(Fraction(1) for _ in range(n)),
        b=tuple(Fraction(s) for _ in range(inst.k)),
        v=tuple(Fraction(p) for p in inst.parts),
    )


def frac_slack_at(pi: FluidProblem, l: int) -> Fraction:
    """slack_l: densest-first fill of the first l targets minus their mass."""
    if not 1 <= l <= pi.k:
        raise GuardNotSatisfied(f"l={l} outside [1, {pi.k}]")
    vl = sum(pi.v[:l], Fraction(0))
    acc = Fraction(0)
    ui_prefix = Fraction(0)
    for ai, ui in zip(pi.a, pi.u):
        mu = max(Fraction(0), min(ui, vl - ui_prefix))
        if ui != 0 and mu != 0:
            acc += ai / ui * mu
        ui_prefix += ui
        if ui_prefix >= vl and mu == 0:
            break
    return acc - sum(pi.b[:l], Fraction(0))


def frac_slack(pi: FluidProblem) -> Fraction:
    """min of slack_l over l = 1..k-1 (0 for k <= 1: nothing to constrain)."""
    if pi.k <= 1:
        return Fraction(0)
    return min(frac_slack_at(pi, l) for l in range(1, pi.k))


def verify_plan(pi: FluidProblem, plan: TransferPlan) -> bool:
    """Exact check of non-negativity, row sums, volume and mass equations."""
    if plan.n != pi.n or (pi.n and plan.k != pi.k):
        return False
    for row in plan.x:
        if any(x < 0 for x in row):
            return False
        if sum(row) != 1:
            return False
    for j in range(pi.k):
        col_vol = sum((pi.u[i] * plan.x[i][j] for i in range(pi.n)),
                      Fraction(0))
        col_mass = sum((pi.a[i] * plan.x[i][j] for i in range(pi.n)),
                       Fraction(0))
        if col_vol != pi.v[j] or col_mass != pi.b[j]:
            return False
    return True


# --- the four reduction steps ----------------------------------------------


def reduce_null_source(pi: FluidProblem) -> FluidProblem:
    """Delete a null first source container; slack_l is unchanged for all l."""
    if pi.n == 0 or pi.u[0] != 0:
        raise GuardNotSatisfied("u_1 != 0")
    return FluidProblem(pi.a[1:], pi.u[1:], pi.b, pi.v)


def reduce_null_target(pi: FluidProblem) -> FluidProblem:
    """Delete a null first target; slack_l(pi') = slack_{l+1}(pi)."""
    if pi.k == 0 or pi.v[0] != 0:
        raise GuardNotSatisfied("v_1 != 0")
    return FluidProblem(pi.a, pi.u, pi.b[1:], pi.v[1:])


def merge_targets(pi: FluidProblem) -> tuple[FluidProblem, Fraction]:
    """Merge equal-density first targets; returns (pi', gamma = v1/(v1+v2));
    slack_l(pi') = slack_{l+1}(pi)."""
    if pi.k < 2 or pi.v[0] == 0 or pi.v[1] == 0:
        raise GuardNotSatisfied("need two positive targets")
    if pi.b[0] * pi.v[1] != pi.b[1] * pi.v[0]:
        raise GuardNotSatisfied("target densities differ")
    gamma = pi.v[0] / (pi.v[0] + pi.v[1])
    merged = FluidProblem(
        pi.a, pi.u,
        (pi.b[0] + pi.b[1],) + pi.b[2:],
        (pi.v[0] + pi.v[1],) + pi.v[2:],
    )
    return merged, gamma


def pour(pi: FluidProblem) -> tuple[FluidProblem, Fraction]:
    """Pour lambda = min(1, v1/u1, (b1 v2 - v1 b2)/(a1 v2 - u1 b2)) of the
    first source into the first target; slack_l is unchanged for all l."""
    if pi.n == 0 or pi.k < 2:
        raise GuardNotSatisfied("need a source and two targets")
    a1, u1, b1, v1 = pi.a[0], pi.u[0], pi.b[0], pi.v[0]
    b2, v2 = pi.b[1], pi.v[1]
    if u1 == 0 or v1 == 0:
        raise GuardNotSatisfied("null container present")
    if b1 * v2 <= b2 * v1:
        raise GuardNotSatisfied("first two target densities do not descend")
    denom = a1 * v2 - u1 * b2
    if denom <= 0:
        raise InternalInvariantBroken("pour denominator not positive")
    lam = min(Fraction(1), v1 / u1, (b1 * v2 - v1 * b2) / denom)
    if lam <= 0:
        raise InternalInvariantBroken("pour portion not positive")
    poured = FluidProblem(
        (a1 - lam * a1,) + pi.a[1:],
        (u1 - lam * u1,) + pi.u[1:],
        (b1 - lam * a1,) + pi.b[1:],
        (v1 - lam * u1,) + pi.v[1:],
    )
    return poured, lam


# --- solver -----------------------------------------------------------------


@dataclass(frozen=True)
class Reduction:
    """One reduction step: kind in {'null_source', 'null_target', 'merge',
    'pour'}; k_after is the target count of the reduced problem; value is
    gamma for merges and lambda for pours."""

    kind: str
    k_after: int
    value: Fraction | None = None


def solve_with_trace(pi: FluidProblem) -> tuple[TransferPlan, tuple[Reduction, ...]]:
    """Iterative solver: apply reductions to the base case, then lift.

    Requires frac_slack(pi) >= 0 (checked up front).  When the initial
    slack is strictly positive, the null-target step is provably never
    taken (the pour never fills a target exactly); this is asserted.
    """
    slack0 = frac_slack(pi)
    if slack0 < 0:
        raise SlackViolated(f"frac_slack = {slack0} < 0")
    strictly_positive = slack0 > 0
    trace: list[Reduction] = []
    cur = pi
    while cur.k > 1:
        if cur.n and cur.u[0] == 0:
            cur = reduce_null_source(cur)
            trace.append(Reduction("null_source", cur.k))
        elif cur.v[0] == 0:
            assert not strictly_positive, "null target under positive slack"
            cur = reduce_null_target(cur)
            trace.append(Reduction("null_target", cur.k))
        elif cur.b[0] * cur.v[1] == cur.b[1] * cur.v[0]:
            cur, gamma = merge_targets(cur)
            trace.append(Reduction("merge", cur.k, gamma))
        else:
            cur, lam = pour(cur)
            trace.append(Reduction("pour", cur.k, lam))
            # the reduced problem must hit one of the other three guards
            assert (cur.u[0] == 0 or cur.v[0] == 0
                    or cur.b[0] * cur.v[1] == cur.b[1] * cur.v[0]), \
                "pour did not reach a terminal guard"
    # base case: k == 1, pour everything into the single target
    rows = [[Fraction(1)] for _ in range(cur.n)]
    # lift in reverse order of the reductions
    one = Fraction(1)
    zero = Fraction(0)
    for red in reversed(trace):
        if red.kind == "null_source":
            width = len(rows[0]) if rows else red.k_after
            rows.insert(0, [one] + [zero] * (width - 1))
        elif red.kind == "null_target":
            for row in rows:
                row.insert(0, zero)
        elif red.kind == "merge":
            g = red.value
            for row in rows:
                first = row[0]
                row[0] = g * first
                row.insert(1, (1 - g) * first)
        else:  # pour
            lam = red.value
            row = rows[0]
            for j in range(len(row)):
                row[j] = (1 - lam) * row[j]
            row[0] += lam
    plan = TransferPlan(tuple(tuple(r) for r in rows))
    return plan, tuple(trace)


def solve(pi: FluidProblem) -> TransferPlan:
    """Exact transfer plan for a problem satisfying the slack condition."""
    plan, _ = solve_with_trace(pi)
    return plan


def solve_recursive(pi: FluidProblem) -> TransferPlan:
    """Reference implementation: the same reduction scheme, recursively.

    Kept for differential testing; recursion depth is Theta(n + k), so the
    iterative solve() is the production path.
    """
    slack0 = frac_slack(pi)
    if slack0 < 0:
        raise SlackViolated(f"frac_slack = {slack0} < 0")

    def rec(cur: FluidProblem) -> list[list[Fraction]]:
        if cur.k == 1:
            return [[Fraction(1)] for _ in range(cur.n)]
        if cur.n and cur.u[0] == 0:
            sub = rec(reduce_null_source(cur))
            width = cur.k
            return [[Fraction(1)] + [Fraction(0)] * (width - 1)] + sub
        if cur.v[0] == 0:
            sub = rec(reduce_null_target(cur))
            return [[Fraction(0)] + row for row in sub]
        if cur.b[0] * cur.v[1] == cur.b[1] * cur.v[0]:
            merged, g = merge_targets(cur)
            sub = rec(merged)
            return [[g * row[0], (1 - g) * row[0]] + row[1:] for row in sub]
        poured, lam = pour(cur)
        sub = rec(poured)
        first = [(1 - lam) * x for x in sub[0]]
        first[0] += lam
        return [first] + sub[1:]

    return TransferPlan(tuple(tuple(r) for r in rec(pi)))


def structure(plan: TransferPlan, trace) -> SolutionStructure:
    """Extract (I_j, gamma_j) from a solve() run.

    gamma_j is the merge ratio recorded when the merged subproblem had
    exactly k - j targets; I_j is the first positive row of column j.
    """
    n, k = plan.n, plan.k
    first_rows = []
    for j in range(k):
        fr = next((i + 1 for i in range(n) if plan.x[i][j] > 0), n + 1)
        first_rows.append(fr)
    first_rows.append(n + 1)
    gammas: dict[int, Fraction] = {}
    for red in trace:
        if red.kind == "merge":
            gammas[k - red.k_after] = red.value
    gamma_list = [Fraction(0)] + [gammas.get(j, Fraction(0))
                                  for j in range(1, k)]
    return SolutionStructure(tuple(first_rows), tuple(gamma_list))


def is_robust(pi: FluidProblem, eps) -> RobustnessReport:
    """Exact evaluation of the four robustness margins at a given epsilon."""
    eps = Fraction(eps)
    m_tot = pi.total_mass
    v_tot = pi.total_volume
    c1 = frac_slack(pi) > eps * m_tot
    c2 = all(bj > eps * m_tot for bj in pi.b)
    c3 = all(vj > eps * v_tot for vj in pi.v)
    if pi.n == 0:
        c4 = False
    elif pi.u[0] == 0:
        # null first source: density is +infinity, so the margin fails for
        # eps > 0 and degenerates to M > 0 at eps = 0
        c4 = m_tot > 0 if eps == 0 else False
    else:
        c4 = m_tot * pi.u[0] > eps * pi.a[0] * v_tot
    return RobustnessReport(eps, c1, c2, c3, c4, m_tot, v_tot)


# --- JSON wire format -------------------------------------------------------
#
# {"a": ["p/q", ...], "u": [...], "b": [...], "v": [...]}; plans are emitted
# as row-major matrices of "p/q" strings.


def fluid_to_json(pi: FluidProblem) -> str:
    return json.dumps({
        "a": [rat_to_str(x) for x in pi.a],
        "u": [rat_to_str(x) for x in pi.u],
        "b": [rat_to_str(x) for x in pi.b],
        "v": [rat_to_str(x) for x in pi.v],
    })


def fluid_from_json(text: str) -> FluidProblem:
    obj = json.loads(text)
    return FluidProblem(
        tuple(rat_from_str(x) for x in obj["a"]),
        tuple(rat_from_str(x) for x in obj["u"]),
        tuple(rat_from_str(x) for x in obj["b"]),
        tuple(rat_from_str(x) for x in obj["v"]),
    )


def plan_to_json(plan: TransferPlan) -> str:
    return json.dumps([[rat_to_str(x) for x in row] for row in plan.x])


def plan_from_json(text: str) -> TransferPlan:
    rows = json.loads(text)
    return TransferPlan(tuple(tuple(rat_from_str(x) for x in row)
                              for row in rows))
