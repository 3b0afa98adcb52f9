"""Command-line front end.

Exit codes: 0 for success or a decided answer, 2 for failure outcomes
(rounding failure, search budget exceeded), 1 for usage and validation
errors.  All numeric output is exact: rationals as "p/q" strings,
integers as JSON numbers below 2^53 and as decimal strings above.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import core, criteria, families, fluid, oracle, rounding, scanner

USAGE_ERROR = 1
FAILURE_OUTCOME = 2


def _int_json(x: int):
    return x if abs(x) < 2 ** 53 else str(x)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _load_instance(path: str):
    n, k, parts = core.instance_from_json(_read(path))
    if len(parts) == k:
        return core.validate_espp(n, k, parts)
    return core.validate_incomplete(n, k, parts)


def _emit(obj) -> None:
    print(json.dumps(obj))


def cmd_slack(args) -> int:
    inst = _load_instance(args.instance)
    parts = inst.parts
    last = len(parts) if isinstance(inst, core.IncompleteInstance) \
        else inst.k - 1
    ends = [j for j in core.block_end_indices(parts) if j <= last]
    if last not in ends:
        ends.append(last)
    _emit({
        "slack": inst.slack(),
        "block_end_slacks": {str(j): core.slack_at(parts, inst.n, inst.k, j)
                             for j in sorted(ends)},
    })
    return 0


def cmd_validate(args) -> int:
    text = _read(args.instance)
    n, k, parts = core.instance_from_json(text)
    try:
        if len(parts) == k:
            inst = core.validate_espp(n, k, parts)
        else:
            inst = core.validate_incomplete(n, k, parts)
    except core.ValidationError as exc:
        rej = exc.rejection
        _emit({"valid": False, "condition": rej.condition,
               "index": rej.index, "value": rej.value})
        return USAGE_ERROR
    _emit({"valid": True, "n": n, "k": k, "target": inst.target,
           "slack": inst.slack(),
           "incomplete": isinstance(inst, core.IncompleteInstance)})
    return 0


def _load_fluid(args) -> fluid.FluidProblem:
    if args.problem:
        return fluid.fluid_from_json(_read(args.problem))
    inst = core.validate_espp(*core.instance_from_json(_read(args.instance)))
    return fluid.from_espp(inst)


def cmd_solve_fluid(args) -> int:
    pi = _load_fluid(args)
    plan = fluid.solve(pi)
    print(fluid.plan_to_json(plan))
    return 0


def cmd_verify_plan(args) -> int:
    pi = _load_fluid(args)
    plan = fluid.plan_from_json(_read(args.plan))
    _emit({"valid": fluid.verify_plan(pi, plan)})
    return 0


def cmd_check_criteria(args) -> int:
    inst = _load_instance(args.instance)
    report = criteria.certify_unsolvable(inst)
    _emit({"certificate": None if report is None
           else json.loads(report.to_json())})
    return 0


def cmd_gen_family(args) -> int:
    a = Fraction(args.a)
    params = families.FamilyParams.from_ratio(a)
    if params is None:
        _emit({"feasible": False, "a": core.rat_to_str(a)})
        return 0
    gen = families.certificates(params)
    members = []
    for _ in range(args.count):
        k, cert = next(gen)
        members.append({
            "k": _int_json(k),
            "n": _int_json(cert.n),
            "blocks": [[2, _int_json(cert.e)], [cert.d, _int_json(cert.f)]],
            "report": json.loads(cert.report.to_json()),
        })
    _emit({
        "feasible": True,
        "params": {
            "a": core.rat_to_str(params.a),
            "d": params.d,
            "u": core.rat_to_str(params.u),
            "v": core.rat_to_str(params.v),
            "k0": _int_json(params.k0),
            "modulus": _int_json(params.modulus),
        },
        "instances": members,
    })
    return 0


def cmd_region_grid(args) -> int:
    rows = families.region_grid(Fraction(args.a), args.resolution)
    if args.format == "csv":
        print("u,v,in_S1,in_S2")
        for u, v, s1, s2 in rows:
            print(f"{core.rat_to_str(u)},{core.rat_to_str(v)},"
                  f"{int(s1)},{int(s2)}")
    else:
        for u, v, s1, s2 in rows:
            _emit({"u": core.rat_to_str(u), "v": core.rat_to_str(v),
                   "in_S1": s1, "in_S2": s2})
    return 0


def cmd_solve_linear(args) -> int:
    alphas = [Fraction(x) for x in args.alphas.split(",")]
    family = rounding.LinearFamily.from_alphas(alphas)
    run = rounding.solve_linear(family, args.n, args.seed, args.retries)
    out = {
        "outcome": run.outcome,
        "iter1": run.iter1,
        "iter2": run.iter2,
        "attempts": run.attempts,
        "seed": run.seed,
    }
    if run.partition is not None:
        out["partition"] = [sorted(p) for p in run.partition.sets]
    _emit(out)
    return 0 if run.outcome == "Solved" else FAILURE_OUTCOME


def cmd_brute(args) -> int:
    inst = core.validate_espp(*core.instance_from_json(_read(args.instance)))
    res = oracle.brute_solve(inst, args.budget)
    out = {
        "status": res.status,
        "stats": {
            "nodes_expanded": res.stats.nodes_expanded,
            "prunes_by_rule": res.stats.prunes_by_rule,
            "elapsed": res.stats.elapsed,
        },
    }
    if res.partition is not None:
        out["partition"] = [sorted(p) for p in res.partition.sets]
    _emit(out)
    return FAILURE_OUTCOME if res.status == "budget_exceeded" else 0


def cmd_scan(args) -> int:
    if args.checkpoint:
        result = scanner.scan_checkpointed(args.n_max, args.shards,
                                           args.checkpoint)
    else:
        result = scanner.scan(args.n_max, args.shards)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        for rec in result.records:
            out.write(rec.to_json() + "\n")
    finally:
        if args.out:
            out.close()
    _emit(result.summary())
    return 0


def main(argv=None) -> int:
    parser = _Parser(prog="espp",
                     description="Equal-sum partition toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("slack", parents=[], help="slack of an instance")
    p.add_argument("--instance", required=True)
    p.set_defaults(func=cmd_slack)

    p = sub.add_parser("validate")
    p.add_argument("--instance", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve-fluid")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--problem")
    src.add_argument("--instance")
    p.set_defaults(func=cmd_solve_fluid)

    p = sub.add_parser("verify-plan")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--problem")
    src.add_argument("--instance")
    p.add_argument("--plan", required=True)
    p.set_defaults(func=cmd_verify_plan)

    p = sub.add_parser("check-criteria")
    p.add_argument("--instance", required=True)
    p.set_defaults(func=cmd_check_criteria)

    p = sub.add_parser("gen-family")
    p.add_argument("--a", required=True)
    p.add_argument("--count", type=int, default=1)
    p.set_defaults(func=cmd_gen_family)

    p = sub.add_parser("region-grid")
    p.add_argument("--a", required=True)
    p.add_argument("--resolution", type=int, default=200)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_region_grid)

    p = sub.add_parser("solve-linear")
    p.add_argument("--alphas", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--retries", type=int, default=8)
    p.set_defaults(func=cmd_solve_linear)

    p = sub.add_parser("brute")
    p.add_argument("--instance", required=True)
    p.add_argument("--budget", type=int, default=10 ** 9)
    p.set_defaults(func=cmd_brute)

    p = sub.add_parser("scan")
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--shards", type=int, default=1)
    p.add_argument("--checkpoint")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (core.ValidationError, core.EsppError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
