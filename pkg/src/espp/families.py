"""Constructive generator of infinite unsolvable families.

For every rational a in (2, 24/7) there are rationals 0 < u, v < 1, an
integer d >= 3 and an arithmetic progression of k values such that the
incomplete instances (ak, k, [2^{uk}, d^{vk}]) are valid and caught by the
two-block certificate, so all their completions are unsolvable.

The parameters solve a strict inequality system in (u, v) for d chosen as
1 + ceil(2/(a-2)):

    (ext1)  v > 0
    (ext2)  v < 1 - u
    (ext3)  u > max(0, (d-a)/(d-2))
    (slk1)  u < a - a^2/4
    (slk2)  v < f(u) = (2ad - a^2 - 4du + a*sqrt(D(u))) / (2d^2)
    (slk3)  v > h(u) = (2ad - a^2 - 4du - a*sqrt(D(u))) / (2d^2)
    (csl)   v > g(u) = 2a - a^2/2 + (d-1)a^2/d^2 - 2a/d - 2u

with D(u) = (2d-a)^2 - 4d(d-2)u.  (slk3) is redundant (its bound is
non-positive on the feasible u range) but re-checked anyway.  The curves f
and g meet at the corner (u1, v1) = (a - a^2/4, (a^2(d-1) - 2ad)/d^2) with
f'(u1) < -2 = g', so stepping u slightly left of u1 opens a v-interval.
The surd comparisons v <> (A +- a*sqrt(D))/(2d^2) are decided exactly over
the rationals by squaring.  For a >= 24/7 the system has no solution for
any d and the generator reports infeasibility.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .core import EsppError, IncompleteInstance, validate_incomplete
from .criteria import CriterionReport, criterion1


class OutOfRange(EsppError):
    """Ratio a outside the admissible interval."""


class NonCoprimeDenominator(EsppError):
    """u, v denominators unsuitable for the k-progression construction."""


class TooSmallK(EsppError):
    """k too small for the o(1) corrections to be absorbed; retry larger."""


UPPER_LIMIT = Fraction(24, 7)


def choose_d(a) -> int:
    """Smallest d >= 3 with a >= 2d/(d-1): d = 1 + ceil(2/(a-2))."""
    a = Fraction(a)
    if not 2 < a < 4:
        raise OutOfRange(f"a={a} outside (2, 4)")
    d = 1 + math.ceil(Fraction(2) / (a - 2))
    assert d >= 3 and a >= Fraction(2 * d, d - 1)
    return d


def corner_point(a, d: int) -> tuple[Fraction, Fraction]:
    """(u1, v1) = (a - a^2/4, (a^2(d-1) - 2ad)/d^2): the f/g crossing."""
    a = Fraction(a)
    u1 = a - a * a / 4
    v1 = (a * a * (d - 1) - 2 * a * d) / (d * d)
    # the corner must lie strictly inside the secondary region
    if not (1 - u1 - v1 > 0 and u1 > _ext3_bound(a, d)):
        raise OutOfRange(f"corner point outside secondary region for a={a}")
    return u1, v1


def _ext3_bound(a: Fraction, d: int) -> Fraction:
    return max(Fraction(0), Fraction(d - a, d - 2))


def _disc(a: Fraction, d: int, u: Fraction) -> Fraction:
    return (2 * d - a) ** 2 - 4 * d * (d - 2) * u


def _below_f(a: Fraction, d: int, u: Fraction, v: Fraction) -> bool:
    """Exact test of v < (2ad - a^2 - 4du + a*sqrt(D))/(2d^2)."""
    disc = _disc(a, d, u)
    if disc < 0:
        return False
    lhs = 2 * d * d * v - (2 * a * d - a * a - 4 * d * u)
    if lhs < 0:
        return True
    return lhs * lhs < a * a * disc


def _above_h(a: Fraction, d: int, u: Fraction, v: Fraction) -> bool:
    """Exact test of v > (2ad - a^2 - 4du - a*sqrt(D))/(2d^2)."""
    disc = _disc(a, d, u)
    if disc < 0:
        return False
    lhs = (2 * a * d - a * a - 4 * d * u) - 2 * d * d * v
    if lhs < 0:
        return True
    return lhs * lhs < a * a * disc


def h_bound_nonpositive(a, d: int, u) -> bool:
    """Exact check that the (slk3) lower bound is <= 0 at u (its redundancy)."""
    a, u = Fraction(a), Fraction(u)
    disc = _disc(a, d, u)
    if disc < 0:
        return False
    num = 2 * a * d - a * a - 4 * d * u
    if num <= 0:
        return True
    return num * num <= a * a * disc


def g_line(a: Fraction, d: int, u: Fraction) -> Fraction:
    return (2 * a - a * a / 2 + Fraction((d - 1), d * d) * a * a
            - Fraction(2, d) * a - 2 * u)


def corner_slope_steep(a, d: int) -> bool:
    """f'(u1) < -2, equivalently a < 2 + 2(3d-4)/(2d^2-5d+4)."""
    a = Fraction(a)
    return a < 2 + Fraction(2 * (3 * d - 4), 2 * d * d - 5 * d + 4)


def check_inequalities(a, d: int, u, v) -> dict[str, bool]:
    """Exact evaluation of every constraint at a rational point (u, v)."""
    a, u, v = Fraction(a), Fraction(u), Fraction(v)
    return {
        "ext1": v > 0,
        "ext2": v < 1 - u,
        "ext3": u > _ext3_bound(a, d),
        "slk1": u < a - a * a / 4,
        "slk2": _below_f(a, d, u, v),
        "slk3": _above_h(a, d, u, v),
        "csl": v > g_line(a, d, u),
    }


def in_regions(a, d: int, u, v) -> tuple[bool, bool]:
    """(in_S1, in_S2): primary region {ext1, slk1, slk2, csl}, secondary
    region {ext2, ext3}; all inequalities strict."""
    ineq = check_inequalities(a, d, u, v)
    in_s1 = ineq["ext1"] and ineq["slk1"] and ineq["slk2"] and ineq["csl"]
    in_s2 = ineq["ext2"] and ineq["ext3"]
    return in_s1, in_s2


def _sqrt_lower(x: Fraction, scale: int = 1 << 64) -> Fraction:
    """Rational lower approximation of sqrt(x) (x >= 0)."""
    num = x.numerator * scale * scale
    return Fraction(math.isqrt(num * x.denominator),
                    x.denominator * scale)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def _next_prime(p: int) -> int:
    p += 1
    while not _is_prime(p):
        p += 1
    return p


def find_uv(a) -> tuple[Fraction, Fraction, int] | None:
    """Rational (u, v) with a common prime denominator p > 2r^2 satisfying
    every strict inequality, or None when a >= 24/7 (no solution exists
    for any d).  Steps inward from the corner with epsilon halving and
    re-checks all constraints exactly after rounding to denominator p."""
    a = Fraction(a)
    if not 2 < a < 4:
        raise OutOfRange(f"a={a} outside (2, 4)")
    if a >= UPPER_LIMIT:
        return None
    d = choose_d(a)
    u1, _ = corner_point(a, d)
    r = a.denominator
    eps = (u1 - _ext3_bound(a, d)) / 4
    for _ in range(512):
        u0 = u1 - eps
        disc = _disc(a, d, u0)
        if disc >= 0:
            root_lo = _sqrt_lower(disc)
            f_lo = (2 * a * d - a * a - 4 * d * u0 + a * root_lo) \
                / (2 * d * d)
            lo = max(Fraction(0), g_line(a, d, u0))
            hi = min(f_lo, 1 - u0)
            if lo < hi:
                v0 = (lo + hi) / 2
                # smallest prime > 2r^2 whose grid survives the re-check;
                # grow geometrically when the window is narrower than 1/p
                p = _next_prime(2 * r * r)
                for _ in range(8):
                    for _ in range(8):
                        u = Fraction(round(u0 * p), p)
                        v = Fraction(round(v0 * p), p)
                        if all(check_inequalities(a, d, u, v).values()):
                            return u, v, d
                        p = _next_prime(p)
                    p = _next_prime(2 * p)
        eps /= 2
    raise EsppError(f"inward search failed for a={a}")  # not expected


def k_progression(a, u: Fraction, v: Fraction) -> tuple[int, int]:
    """(k0, modulus) such that every k = k0 + t*modulus makes n = ak,
    s^{n,k} = a(ak+1)/2, uk and vk all integers.

    With a = m/r in lowest terms, s is integral for k = -m^{-1} r modulo
    2r^2 when m is odd, and modulo r^2 when m is even (r then odd); n = ak
    follows since r divides that residue.  uk, vk are integral for p | k,
    where p is the common prime denominator of u and v, and gcd(p, 2r^2)=1
    lets the two progressions combine by the CRT.
    """
    a, u, v = Fraction(a), Fraction(u), Fraction(v)
    m, r = a.numerator, a.denominator
    p = u.denominator
    if v.denominator != p:
        raise NonCoprimeDenominator(
            f"u, v denominators differ: {p} vs {v.denominator}")
    if math.gcd(p, 2 * r * r) != 1:
        raise NonCoprimeDenominator(f"gcd({p}, 2r^2) != 1")
    if m % 2:
        mod0 = 2 * r * r
    else:
        mod0 = r * r
    res0 = (-pow(m, -1, mod0) * r) % mod0
    modulus = mod0 * p
    # CRT: k == res0 (mod mod0), k == 0 (mod p)
    k0 = (res0 * p * pow(p, -1, mod0)) % modulus
    if k0 == 0:
        k0 = modulus
    return k0, modulus


@dataclass(frozen=True)
class FamilyParams:
    """Certified parameters of one infinite unsolvable family."""

    a: Fraction
    d: int
    u: Fraction
    v: Fraction
    k0: int
    modulus: int

    @classmethod
    def from_ratio(cls, a) -> "FamilyParams | None":
        uv = find_uv(a)
        if uv is None:
            return None
        u, v, d = uv
        k0, modulus = k_progression(a, u, v)
        return cls(Fraction(a), d, u, v, k0, modulus)


@dataclass(frozen=True)
class FamilyCertificate:
    """A verified family member (ak, k, [2^e, d^f]) in block form.

    Verification is closed-form throughout (block-end slacks, the
    completability condition and the two-block certificate), so members
    with astronomically many parts never need materializing.
    """

    n: int
    k: int
    d: int
    e: int
    f: int
    report: CriterionReport

    @property
    def blocks(self) -> tuple[tuple[int, int], ...]:
        return ((2, self.e), (self.d, self.f))

    def materialize(self) -> tuple[IncompleteInstance, CriterionReport]:
        """Re-validate through the generic tuple-based path (small members)."""
        parts = (2,) * self.e + (self.d,) * self.f
        inst = validate_incomplete(self.n, self.k, parts)
        report = criterion1(inst)
        if report is None:
            raise EsppError("materialized member lost its certificate")
        return inst, report


def certify_member(params: FamilyParams, k: int) -> FamilyCertificate:
    """Verify the family member at k with closed forms only.

    Raises TooSmallK when the o(1) corrections are not yet absorbed; the
    progression guarantees integrality, the strict inequalities guarantee
    all checks for every sufficiently large k.
    """
    a, u, v, d = params.a, params.u, params.v, params.d
    n = a * k
    e = u * k
    f = v * k
    if n.denominator != 1 or e.denominator != 1 or f.denominator != 1:
        raise TooSmallK(f"k={k} not in the integral progression")
    n, e, f = int(n), int(e), int(f)
    if e < 1 or f < 1 or e + f >= k:
        raise TooSmallK(f"k={k}: degenerate block lengths e={e}, f={f}")
    total = n * (n + 1) // 2
    if (n * (n + 1)) % (2 * k):
        raise TooSmallK(f"k={k}: target sum not integral")
    s = total // k
    # completability: n - (2e + df) >= (k - e - f) * d
    if n - (2 * e + d * f) < (k - e - f) * d:
        raise TooSmallK(f"k={k}: prefix not completable")
    # slack at the two block ends (sufficient by the block-end lemma)
    if e * (2 * n - 2 * e + 1) - e * s < 0:
        raise TooSmallK(f"k={k}: slack negative at the 2-block end")
    p_lf = 2 * e + d * f
    if p_lf * (2 * n - p_lf + 1) // 2 - (e + f) * s < 0:
        raise TooSmallK(f"k={k}: slack negative at the d-block end")
    # the two-block certificate, closed form
    c = s - n
    h = 2 * (n - e) - s + 1
    if f <= h:
        raise TooSmallK(f"k={k}: certificate condition (a) fails")
    lo, hi = c - d * (f - h), c - 1
    lhs = (lo + hi) * (hi - lo + 1) // 2
    rhs = (f - h) * s
    if lhs >= rhs:
        raise TooSmallK(f"k={k}: certificate condition (b) fails")
    report = CriterionReport(
        "C1", lhs, rhs,
        witness={"e": e, "d": d, "f": f, "c": c, "h": h, "s": s,
                 "n": n, "k": k},
    )
    return FamilyCertificate(n, k, d, e, f, report)


def emit_instance(params: FamilyParams,
                  k: int) -> tuple[IncompleteInstance, CriterionReport]:
    """certify_member plus materialization through the generic validators."""
    return certify_member(params, k).materialize()


def certificates(params: FamilyParams, max_skips: int = 10000):
    """Yield certified (k, FamilyCertificate) along the progression,
    skipping the finitely many too-small k."""
    k = params.k0
    skips = 0
    while True:
        try:
            cert = certify_member(params, k)
        except TooSmallK:
            skips += 1
            if skips > max_skips:
                raise
        else:
            yield k, cert
        k += params.modulus


def region_grid(a, resolution: int):
    """Exact membership samples of the primary/secondary regions on the
    rational grid (u, v) in [0, a - a^2/4] x [0, 1]: yields rows
    (u, v, in_S1, in_S2)."""
    a = Fraction(a)
    if not 2 < a < 4:
        raise OutOfRange(f"a={a} outside (2, 4)")
    d = choose_d(a)
    u1 = a - a * a / 4
    for i in range(resolution + 1):
        u = u1 * i / resolution
        for j in range(resolution + 1):
            v = Fraction(j, resolution)
            in_s1, in_s2 = in_regions(a, d, u, v)
            yield u, v, in_s1, in_s2
