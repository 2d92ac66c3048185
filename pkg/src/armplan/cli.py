"""Console entry points ``bench`` and ``demo``.

Exit codes: 0 success, 1 bad input, 2 demo aborted.
"""

from __future__ import annotations

import argparse
import sys

from .bench import BenchSpec, BenchSpecError, format_summary, read_records, run_benchmark, summarize, write_records
from .executor import CacheBuildError
from .planners import InvalidQuery, PlannerConfig

OK, SPEC_ERROR, ABORTED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(SPEC_ERROR, f"{self.prog}: error: {message}\n")


def _bench_parser():
    p = _Parser(prog="bench", description="Benchmark planners on a query set. "
                "Use 'bench summarize records.csv' to print the table of an earlier run.")
    p.add_argument("--scene", help="scene JSON (bundled car interior by default)")
    p.add_argument("--queries", help="query JSON (bundled nine-query set by default)")
    p.add_argument("--script", help="mannequin script; its first keyframe seats the user")
    p.add_argument("--algorithms", default="rrt,rrtconnect,bitrrt,prm")
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timeout", type=float, default=5.0)
    p.add_argument("--parallel", action="store_true", help="run cells concurrently; timings marked contended")
    p.add_argument("--out", default="records.csv")
    return p


def bench_main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        if argv[:1] == ["summarize"]:
            p = _Parser(prog="bench summarize")
            p.add_argument("records")
            args = p.parse_args(argv[1:])
            print(format_summary(summarize(read_records(args.records))))
            return OK
        args = _bench_parser().parse_args(argv)
        spec = BenchSpec(tuple(a.strip() for a in args.algorithms.split(",") if a.strip()), args.queries,
                         args.scene, args.script, args.runs, args.seed, args.timeout, args.parallel)
        records = run_benchmark(spec)
        write_records(args.out, records)
        print(f"{len(records)} records written to {args.out}")
        print(format_summary(summarize(records)))
        return OK
    except (BenchSpecError, ValueError) as exc:
        print(f"bench: {exc}", file=sys.stderr)
        return SPEC_ERROR
    except SystemExit as exc:
        return int(exc.code or 0)


def _demo_parser():
    p = _Parser(prog="demo", description="Run the safe-position (scheme1) or in-workspace (scheme2) demo.")
    sub = p.add_subparsers(dest="scheme", required=True)
    s1 = sub.add_parser("scheme1", help="cached plans between safe positions")
    s1.add_argument("--scene")
    s1.add_argument("--safe", help="safe positions JSON")
    s1.add_argument("--goals", help="goal stream, one position name per line")
    s1.add_argument("--cache", default="plan_cache.json", help="read if present, written after a cold build")
    s1.add_argument("--log", help="execution log CSV")
    s2 = sub.add_parser("scheme2", help="supervised motion near the moving user")
    s2.add_argument("--scene")
    s2.add_argument("--script", help="mannequin script CSV (bundled adversarial script by default)")
    s2.add_argument("--query", help="query JSON")
    s2.add_argument("--speed-scale", type=float, default=0.25)
    s2.add_argument("--max-replans", type=int, default=10)
    s2.add_argument("--log", help="execution log CSV")
    for s in (s1, s2):
        s.add_argument("--algorithm", default="bitrrt")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--timeout", type=float, default=5.0)
    return p


def demo_main(argv=None) -> int:
    from .mannequin import load_script
    from .scenarios import demo_scheme1, demo_scheme2, load_goals, load_positions, load_query
    from .scenes import load_scene

    try:
        args = _demo_parser().parse_args(sys.argv[1:] if argv is None else list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        scene = load_scene(args.scene)
        cfg = PlannerConfig(timeout=args.timeout, rng_seed=args.seed)
        if args.scheme == "scheme1":
            safe, goals = load_positions(args.safe), load_goals(args.goals)
        else:
            script = None if args.script is None else load_script(args.script)
            query = load_query(args.query)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"demo: {exc}", file=sys.stderr)
        return SPEC_ERROR

    if args.scheme == "scheme1":
        try:
            res = demo_scheme1(scene, safe, goals, args.cache, cfg, args.algorithm)
        except CacheBuildError as exc:
            print(f"demo: cache build failed: {exc}", file=sys.stderr)
            return ABORTED
        except ValueError as exc:
            print(f"demo: {exc}", file=sys.stderr)
            return SPEC_ERROR
        if args.log:
            res.log.write_csv(args.log)
        state = "built" if res.cold else "loaded"
        print(f"cache {state}: {len(res.cache.entries)} entries, {res.planner_calls_build} planner calls")
        print(f"served {len(goals)} goals: {len(res.log.executed)} executions, "
              f"{len(res.log.of('idle'))} idle, {len(res.log.of('error'))} errors, "
              f"{res.planner_calls_serve} planner calls")
        for e in res.log.of("error"):
            print(f"  error: {e.note}", file=sys.stderr)
        return ABORTED if res.log.of("error") else OK

    try:
        res = demo_scheme2(scene, script, query, cfg, args.speed_scale, args.algorithm, args.max_replans)
    except (InvalidQuery, ValueError) as exc:
        print(f"demo: {exc}", file=sys.stderr)
        return SPEC_ERROR
    sup = res.supervisor
    if args.log:
        sup.log.write_csv(args.log)
    for e in sup.log.events:
        if e.kind != "advance":
            print(f"t={e.t:7.2f}  v{e.version:<4d} {e.kind:15s} {e.note}")
    if not sup.success:
        print(f"demo: aborted: {sup.reason}", file=sys.stderr)
        return ABORTED
    print(f"goal reached after {sup.replans} replans, {len(sup.executed)} ticks")
    return OK
