"""Exhaustive enumeration of incomplete instances caught by the criterion.

For each n <= n_max and each k dividing n(n+1)/2 (with n >= 2k, forced by
completability), incomplete instances with a leading 2-block are grown
part by part in block order, pruning on exact block-end slack and on the
completability bound; a prefix is emitted the moment the criterion first
fires, which is then necessarily at its last index, and is not extended
further (minimal certificates: every extension fires identically).

The engine splits each (n, k, d) search at the index d + u (u spare big
elements): middle-zone states (l, P, q_last, p_{d+e}) are deduplicated
with multiplicities, and the scanned region uses the identity

    sigma_i = slack_l - slack_{d+u} + T_i * E,   E = P_{d+u} - (2d + u),

with T_i the scanned-part total, which both decides firing in O(1) and
kills whole subtrees: T_i only grows, so once (T + q) * E exceeds
slack_{d+u} nothing below can fire.  The u = 0 branch never fires at all
(slack_{d+u} = d*u = 0 and E = 0 leave sigma = slack_l >= 0), so d stays
below (2n - s)/2.  Middle-zone realizations are reconstructed only for
buckets that fire.  Every emitted instance is re-validated through the
generic validators and the criterion re-derived from scratch.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from math import isqrt
from multiprocessing import Pool

from .core import (
    EsppError,
    IncompleteInstance,
    parts_to_blocks,
    validate_incomplete,
)
from .criteria import CriterionReport, criterion3


class CorruptCheckpoint(EsppError):
    """Checkpoint file cannot be parsed or disagrees with the request."""


# paper-reported reference counts at n_max = 500, kept for the summary's
# discrepancy flag (see the decisions ledger on the enumeration universe)
REPORTED_TOTAL_500 = 17050
REPORTED_CASE2_500 = 7


@dataclass(frozen=True)
class ScanRecord:
    instance: IncompleteInstance
    report: CriterionReport

    @property
    def key(self):
        return (self.instance.n, self.instance.k, self.instance.parts)

    def to_json(self) -> str:
        inst = self.instance
        return json.dumps({
            "n": inst.n,
            "k": inst.k,
            "blocks": [list(b) for b in parts_to_blocks(inst.parts)],
            "report": json.loads(self.report.to_json()),
        })


@dataclass
class ScanResult:
    n_max: int
    records: list
    flags: dict

    @property
    def total(self) -> int:
        return len(self.records)

    @property
    def case2(self) -> list:
        return [r for r in self.records
                if r.report.criterion == "C3_CaseII"]

    def minima(self, count: int = 2) -> list:
        return sorted(self.case2, key=lambda r: r.key)[:count]

    def summary(self) -> dict:
        case2 = self.case2
        out = {
            "n_max": self.n_max,
            "total": self.total,
            "case2": len(case2),
            "minima": [{"n": r.instance.n, "k": r.instance.k,
                        "blocks": [list(b) for b in
                                   parts_to_blocks(r.instance.parts)]}
                       for r in self.minima()],
            "flags": dict(self.flags),
        }
        if self.n_max == 500:
            out["reported_total"] = REPORTED_TOTAL_500
            out["reported_case2"] = REPORTED_CASE2_500
            out["count_discrepancy"] = (self.total != REPORTED_TOTAL_500 or
                                        len(case2) != REPORTED_CASE2_500)
        return out


def _wlo(two_n1: int, s: int, l2: int) -> int | None:
    """Smallest prefix sum W with slack >= 0 at index l2:
    W(2n+1-W) >= 2*l2*s."""
    disc = two_n1 * two_n1 - 8 * l2 * s
    if disc < 0:
        return None
    w = -((isqrt(disc) - two_n1) // 2)
    if w * (two_n1 - w) < 2 * l2 * s:
        w += 1
    return w


def scan_cell(n: int, k: int):
    """Raw minimal certificates for one (n, k): list of
    (d, tail, case, i) with flags; tail holds the parts after the 2-block."""
    total = n * (n + 1) // 2
    s = total // k
    m = s - n - 1
    two_n1 = 2 * n + 1
    d_max = min(k - 1, (2 * n - s) // 2)  # u >= 1: u = 0 never fires
    d_min = max(1, 2 * n - s + 3 - k)     # the scan region must be nonempty
    out = []
    flags = {"outsized_parts": 0, "secondary_undefined": 0}
    for d in range(d_min, d_max + 1):
        _scan_nkd(n, k, s, m, two_n1, d, out, flags)
    return out, flags


def _scan_nkd(n, k, s, m, two_n1, d, out, flags):
    u = two_n1 - s - 2 * d
    e = (u + 2) // 2
    du = d + u
    base = 2 * d + u
    dus2 = 2 * du * s

    def viable(l, P, q):
        # some reachable bucket P' in [Pmin, Pmax] must satisfy
        # slack_du(P') >= q * (P' - base): a concave quadratic in P'
        r = du - l
        pmin = P + r * q
        hi0 = (n - P) // (k - l)
        pmax = min(P + r * hi0, n - (k - du) * q)
        if pmin > pmax:
            return False

        def big_g(pd):
            return pd * (two_n1 - pd) - dus2 - 2 * q * pd + 2 * q * base

        best = max(big_g(pmin), big_g(pmax))
        vtx = (two_n1 - 2 * q) // 2
        if pmin < vtx < pmax:
            best = max(best, big_g(vtx), big_g(vtx + 1))
        return best >= 0

    # phase A: middle-zone states (P, q_last, p_de) with multiplicities
    level = {(2 * d, 3, None): 1}
    for l in range(d, du):
        l2 = l + 1
        w = _wlo(two_n1, s, l2)
        if w is None:
            return
        nxt: dict = {}
        for (P, qmin, p_de), cnt in level.items():
            hi = (n - P) // (k - l)
            for q in range(max(qmin, w - P), hi + 1):
                if not viable(l2, P + q, q):
                    continue
                key = (P + q, q, q if (p_de is None and l2 == d + e)
                       else p_de)
                nxt[key] = nxt.get(key, 0) + cnt
        level = nxt
        if not level:
            return

    # phase B: scanned region, one subtree per bucket
    fire_sites: dict = {}
    for (p_du, qmin0, p_de0), _mult in level.items():
        big_e = p_du - base
        slack_du = p_du * (two_n1 - p_du) // 2 - du * s
        stack = [(du, p_du, qmin0, (), p_de0)]
        while stack:
            l, P, qmin, tail, p_de = stack.pop()
            if l >= k - 1:
                continue
            if big_e > 0 and (P - p_du + qmin) * big_e > slack_du:
                continue  # no descendant can ever fire
            hi = (n - P) // (k - l)
            if hi < qmin:
                continue
            w = _wlo(two_n1, s, l + 1)
            if w is None:
                continue
            for q in range(max(qmin, w - P), hi + 1):
                l2 = l + 1
                P2 = P + q
                big_t = P2 - p_du
                p_de2 = q if p_de is None else p_de  # u = 0 cannot occur
                if big_t > m:
                    flags["outsized_parts"] += 1
                    stack.append((l2, P2, q, tail + (q,), p_de2))
                    continue
                slack_l2 = P2 * (two_n1 - P2) // 2 - l2 * s
                sigma = slack_l2 - slack_du + big_t * big_e
                if sigma < 0:
                    fire_sites.setdefault(
                        (p_du, qmin0, p_de0), []).append(
                            (tail + (q,), "C3_CaseI", l2 - du))
                    continue
                if sigma == 0:
                    ww = p_de2 - 1
                    rest = m - big_t
                    if ww > rest:
                        flags["secondary_undefined"] += 1
                        fire2 = True
                    else:
                        sec = ww * rest - ww * (ww - 1) // 2
                        fire2 = 2 * sec < s
                    if fire2:
                        fire_sites.setdefault(
                            (p_du, qmin0, p_de0), []).append(
                                (tail + (q,), "C3_CaseII", l2 - du))
                        continue
                stack.append((l2, P2, q, tail + (q,), p_de2))

    if not fire_sites:
        return
    mids = _middle_realizations(n, k, s, two_n1, d, du, e,
                                set(fire_sites))
    for bkey, sites in fire_sites.items():
        for mid in mids[bkey]:
            for tail, case, i in sites:
                out.append((d, mid + tail, case, i))


def _middle_realizations(n, k, s, two_n1, d, du, e, targets):
    """All middle-zone tails reaching each firing bucket."""
    out = {t: [] for t in targets}
    if d == du:
        for t in targets:
            out[t].append(())
        return out
    dead: set = set()
    wtab = {l2: _wlo(two_n1, s, l2) for l2 in range(d + 1, du + 1)}

    def dfs(l, P, qmin, p_de, tail):
        if l == du:
            key = (P, qmin, p_de)
            if key in targets:
                out[key].append(tail)
                return True
            return False
        state = (l, P, qmin, p_de)
        if state in dead:
            return False
        found = False
        l2 = l + 1
        w = wtab[l2]
        if w is not None:
            hi = (n - P) // (k - l)
            for q in range(max(qmin, w - P), hi + 1):
                p_de2 = q if (p_de is None and l2 == d + e) else p_de
                if dfs(l2, P + q, q, p_de2, tail + (q,)):
                    found = True
        if not found:
            dead.add(state)
        return found

    dfs(d, 2 * d, 3, None, ())
    return out


def cells(n_max: int) -> list:
    """All (n, k) worth scanning: k | n(n+1)/2 and n >= 2k."""
    out = []
    for n in range(1, n_max + 1):
        total = n * (n + 1) // 2
        for k in range(2, n // 2 + 1):
            if total % k == 0:
                out.append((n, k))
    return out


def _finish_record(n, k, d, tail) -> ScanRecord:
    """Re-validate the instance and re-derive the criterion from scratch."""
    parts = (2,) * d + tail
    inst = validate_incomplete(n, k, parts)
    report = criterion3(inst)
    if report is None:
        raise EsppError(f"scan emitted a non-firing instance ({n},{k})")
    return ScanRecord(inst, report)


def _scan_cell_job(cell):
    n, k = cell
    raw, flags = scan_cell(n, k)
    return cell, raw, flags


def scan(n_max: int, shards: int = 1) -> ScanResult:
    """Scan all cells up to n_max; shards > 1 distributes cells over
    worker processes (identical result set regardless of sharding)."""
    return _scan_impl(cells(n_max), n_max, shards, None, set())


def scan_checkpointed(n_max: int, shards: int = 1,
                      checkpoint_path: str | None = None) -> ScanResult:
    """scan() with resumable progress: completed cells and their raw
    records are appended to a JSONL checkpoint and skipped on resume."""
    done: dict = {}
    if checkpoint_path and os.path.exists(checkpoint_path):
        try:
            with open(checkpoint_path) as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    obj = json.loads(line)
                    cell = tuple(obj["cell"])
                    raw = [(r[0], tuple(r[1]), r[2], r[3])
                           for r in obj["records"]]
                    done[cell] = raw
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptCheckpoint(str(exc)) from exc
    return _scan_impl(cells(n_max), n_max, shards, checkpoint_path, done)


def _scan_impl(all_cells, n_max, shards, checkpoint_path, done) -> ScanResult:
    raw_by_cell = dict(done)
    todo = [c for c in all_cells if c not in raw_by_cell]
    flags = {"outsized_parts": 0, "secondary_undefined": 0}
    ckpt = open(checkpoint_path, "a") if checkpoint_path else None
    try:
        if shards > 1 and len(todo) > 1:
            with Pool(shards) as pool:
                results = pool.imap_unordered(_scan_cell_job, todo,
                                              chunksize=8)
                for cell, raw, cell_flags in results:
                    raw_by_cell[cell] = raw
                    for key in flags:
                        flags[key] += cell_flags[key]
                    if ckpt:
                        ckpt.write(json.dumps(
                            {"cell": list(cell),
                             "records": [[d, list(t), c, i]
                                         for d, t, c, i in raw]}) + "\n")
        else:
            for cell in todo:
                cell, raw, cell_flags = _scan_cell_job(cell)
                raw_by_cell[cell] = raw
                for key in flags:
                    flags[key] += cell_flags[key]
                if ckpt:
                    ckpt.write(json.dumps(
                        {"cell": list(cell),
                         "records": [[d, list(t), c, i]
                                     for d, t, c, i in raw]}) + "\n")
    finally:
        if ckpt:
            ckpt.close()
    records = []
    for (n, k) in sorted(raw_by_cell):
        cell_records = []
        for d, tail, case, i in raw_by_cell[(n, k)]:
            rec = _finish_record(n, k, d, tuple(tail))
            assert rec.report.criterion == case
            assert rec.report.witness["i"] == i
            cell_records.append(rec)
        cell_records.sort(key=lambda r: r.key)
        records.extend(cell_records)
    return ScanResult(n_max, records, flags)
