"""Command-line interface.

Exit status: 0 accepted / proved / clean, 1 rejected / refuted / violations,
2 depth exhausted, 3 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from .deciders import stare_at, step_subtype
from .differential import run_differential, write_report
from .engines import prove_subtyping
from .errors import InputError
from .generate import DEFAULT_CHECKS, FuzzConfig
from .judgements import SystemId, Verdict
from .parser import parse_context, parse_judgement, parse_type, print_judgement, sort_of
from .reductions import map_ctx, map_judgement, map_type, replay_catalog
from .syntax import EMPTY, show, show_ctx

EXIT_OK, EXIT_NO, EXIT_EXHAUSTED, EXIT_INPUT = 0, 1, 2, 3
DEFAULT_DEPTH = 12
ALGORITHMS = ("step", "stare-at")
CHECK_SCHEMA = "dsub-check"
SCHEMA_VERSION = 1

_EXIT = {
    Verdict.PROVED.value: EXIT_OK,
    "accepted": EXIT_OK,
    Verdict.REFUTED.value: EXIT_NO,
    "rejected": EXIT_NO,
    Verdict.DEPTH_EXHAUSTED.value: EXIT_EXHAUSTED,
}


def default_depth() -> int:
    raw = os.environ.get("DSUB_DEPTH")
    if raw is None:
        return DEFAULT_DEPTH
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"DSUB_DEPTH must be an integer, got {raw!r}") from None
    if value < 1:
        raise InputError("DSUB_DEPTH must be >= 1")
    return value


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        print(text)


def cmd_check(args) -> int:
    system = args.system
    sysid = SystemId.DSTRONG_KERNEL if system in ALGORITHMS else SystemId(system)
    sort = sort_of(sysid)
    ctx = parse_context(args.ctx, sort) if args.ctx is not None else None
    rctx = parse_context(args.rctx, sort) if args.rctx is not None else None
    j = parse_judgement(args.judgement, sysid, ctx=ctx, rctx=rctx)
    if system in ALGORITHMS:
        if system == "step":
            if j.left_ctx != j.right_ctx:
                raise InputError("step subtyping takes a single context")
            v = step_subtype(j.left_ctx, j.lhs, j.rhs)
        else:
            v = stare_at(j.left_ctx, j.lhs, j.rhs, j.right_ctx)
        verdict = "accepted" if v.accepted else "rejected"
        payload = {"schema": CHECK_SCHEMA, "version": SCHEMA_VERSION, "system": system,
                   "judgement": print_judgement(j), "verdict": verdict,
                   "fuel": {"calls": v.calls, "nesting": v.fuel_used, "bound": v.bound}}
        trace = v.trace
    else:
        if not sysid.two_contexts and j.left_ctx != j.right_ctx:
            raise InputError(f"{system} takes a single context; --rctx is only for strong-kernel")
        depth = args.depth if args.depth is not None else default_depth()
        res = prove_subtyping(j, depth)
        verdict = res.verdict.value
        payload = {"schema": CHECK_SCHEMA, "version": SCHEMA_VERSION, "system": system,
                   "judgement": print_judgement(j), "verdict": verdict, "depth": depth,
                   "pool_truncated": res.pool_truncated}
        trace = res.derivation
    if args.trace and trace is not None:
        payload["derivation"] = trace.to_json()
    text = verdict
    if args.trace and trace is not None:
        text = f"{verdict}\n{trace.pretty()}"
    _emit(args, payload, text)
    return _EXIT[verdict]


def cmd_map(args) -> int:
    ctx = parse_context(args.ctx, "F") if args.ctx is not None else None
    try:
        j = parse_judgement(args.input, SystemId.FSUB, ctx=ctx)
    except InputError:
        t = parse_type(args.input, "F", ctx if ctx is not None else EMPTY)
        image = map_type(t, allow_fun=args.allow_fun)
        text = show(image, args.unicode)
        if ctx:
            text = f"{show_ctx(map_ctx(ctx, allow_fun=args.allow_fun), args.unicode)} |- {text}"
        _emit(args, {"schema": "dsub-map", "version": SCHEMA_VERSION, "image": text}, text)
        return EXIT_OK
    image = map_judgement(j, SystemId.DSUB_ORIG, allow_fun=args.allow_fun)
    text = print_judgement(image, args.unicode)
    _emit(args, {"schema": "dsub-map", "version": SCHEMA_VERSION, "image": text}, text)
    return EXIT_OK


def cmd_fuzz(args) -> int:
    cfg = FuzzConfig(seed=args.seed, count=args.count, max_measure=args.max_measure,
                     max_ctx_len=args.max_ctx_len, systems=tuple(args.systems or DEFAULT_CHECKS))
    report = run_differential(cfg, keep_instances=args.json or args.output is not None)
    if args.json or args.output is not None:
        write_report(report, args.output)
    if not args.json:
        s = report.to_json()["summary"]
        print(f"instances: {s['instances']}  violations: {s['violations']}")
        for name, counts in s["counts"].items():
            print(f"  {name}: " + ", ".join(f"{k}={n}" for k, n in counts.items()))
        print(f"  stare-at calls: max {s['fuel']['max_calls']}, "
              f"max calls/bound {s['fuel']['max_calls_over_bound']}")
        for v in report.violations[:20]:
            print(f"VIOLATION {v['property']}: {v['instance']}")
    return EXIT_OK if report.clean else EXIT_NO


def cmd_examples(args) -> int:
    outcomes = replay_catalog()
    ok = all(o.ok for o in outcomes)
    if args.json:
        print(json.dumps({
            "schema": "dsub-catalog-replay", "version": SCHEMA_VERSION, "matched": ok,
            "results": [{"entry": o.entry, "kind": o.check.kind, "system": o.check.system,
                         "text": o.check.text, "expected": o.check.expect, "actual": o.actual, "ok": o.ok}
                        for o in outcomes],
        }, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        for o in outcomes:
            label = o.check.system or o.check.kind
            print(f"{'ok ' if o.ok else 'BAD'} {o.entry:24} {label:16} {o.actual}")
        print(f"{sum(o.ok for o in outcomes)}/{len(outcomes)} checks matched")
    return EXIT_OK if ok else EXIT_NO


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors are input errors (status 3); status 2 means depth exhausted."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")

    p = _ArgumentParser(prog="dsub", description="Subtyping checkers for D<: and F<:.")
    sub = p.add_subparsers(dest="command", required=True)

    systems = [s.value for s in SystemId] + list(ALGORITHMS)
    c = sub.add_parser("check", parents=[common], help="decide or search for one judgement")
    c.add_argument("--system", required=True, choices=systems)
    c.add_argument("--depth", type=int, help="search depth cap (default: $DSUB_DEPTH or %d)" % DEFAULT_DEPTH)
    c.add_argument("--ctx", help="left context, e.g. 'x: {A: Bot .. Top}'")
    c.add_argument("--rctx", help="right context for strong-kernel / stare-at (defaults to --ctx)")
    c.add_argument("--trace", action="store_true", help="print the derivation or algorithm trace")
    c.add_argument("judgement", help="'S <: U' or 'G1 |- S <: U -| G2'")
    c.set_defaults(func=cmd_check)

    m = sub.add_parser("map-fsub", parents=[common], help="map an F<: type or judgement into D<:")
    m.add_argument("--ctx", help="F<: context, e.g. 'X <: Top'")
    m.add_argument("--allow-fun", action="store_true", help="admit function types via the original mapping")
    m.add_argument("--unicode", action="store_true", help="print with mathematical symbols")
    m.add_argument("input")
    m.set_defaults(func=cmd_map)

    f = sub.add_parser("fuzz", parents=[common], help="differential testing on random instances")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--count", type=int, default=1000)
    f.add_argument("--max-measure", type=int, default=5)
    f.add_argument("--max-ctx-len", type=int, default=2)
    f.add_argument("--systems", nargs="+", choices=DEFAULT_CHECKS)
    f.add_argument("--output", "-o", help="write the JSON report to this file")
    f.set_defaults(func=cmd_fuzz)

    e = sub.add_parser("examples", parents=[common], help="replay the catalog of named examples")
    e.set_defaults(func=cmd_examples)
    return p


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "depth", None) is not None and args.depth < 1:
        print("error: --depth must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
