"""Command-line entry point.

Every command prints one JSON report on stdout. Exit status is 0 on success,
2 when a ``check-*`` command finds a stability violation, and 1 on any error
(diagnostics go to stderr).
"""
from __future__ import annotations

import argparse
import json
import sys

from . import coalition as coal
from . import stability as stab
from .instance_file import instance_digest, parse_instance
from .model import (
    NEW_SINGLETON,
    Coalition,
    DeviationMove,
    DynamicsTrace,
    GameError,
    Instance,
    Partition,
    StepLimitExceeded,
    canonical_partition,
)

class BadFlag(GameError):
    pass


class UnknownCommand(GameError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        if "invalid choice" in message and "command" in message:
            raise UnknownCommand(message)
        raise BadFlag(message)


def fmt(x: float) -> float:
    """Round to 12 significant digits for stable output."""
    x = float(f"{x:.12g}")
    return 0.0 if x == 0 else x


def _round(obj):
    if isinstance(obj, float):
        return fmt(obj)
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _evaluation(c: Coalition, instance: Instance) -> dict:
    ev = coal.evaluate(c, instance)
    return {
        "coalition": str(c),
        "location": list(ev.location),
        "transport_total": ev.transport_total,
        "project_cost": ev.project_cost,
        "egalitarian_cost": ev.egalitarian_cost,
        "tax_shares": {str(i): x for i, x in ev.tax_shares.items()},
    }


def _move(mv: DeviationMove) -> dict:
    return {
        "agent": mv.agent,
        "from": str(mv.from_block),
        "to": "NEW_SINGLETON" if mv.to_block is NEW_SINGLETON else str(mv.to_block),
        "old_cost": mv.old_cost,
        "new_cost": mv.new_cost,
    }


def _trace(trace: DynamicsTrace) -> dict:
    out = {
        "terminal": trace.terminal.upper() if trace.terminal else "STEP_LIMIT",
        "states": [str(s) for s in trace.states],
        "moves": [_move(m) for m in trace.moves],
    }
    if trace.terminal == "cycle":
        out["cycle_start"] = trace.cycle_start
        out["cycle_length"] = trace.cycle_length
    return out


def _partition_arg(text: str, instance: Instance, flag: str) -> Partition:
    try:
        return Partition.parse(text, instance.n)
    except ValueError as exc:
        raise BadFlag(f"{flag}: {exc}") from None


def _block_costs(p: Partition, instance: Instance) -> list[dict]:
    return [{"block": str(b), "cost": coal.egalitarian_cost(b, instance)} for b in p.blocks]


def run(args: argparse.Namespace) -> tuple[int, dict]:
    instance = parse_instance(args.instance)
    used: set[int] = set()
    status, code = "OK", 0
    cmd = args.command

    if cmd == "evaluate":
        try:
            c = Coalition.parse(args.coalition)
            instance.check_coalition(c)
        except ValueError as exc:
            raise BadFlag(f"--coalition: {exc}") from None
        used.add(c.mask)
        ev = coal.evaluate(c, instance)
        result = {"coalition": str(c)}
        summary = f"coalition {c} cost {fmt(ev.egalitarian_cost):.12g}"

    elif cmd == "rank":
        ranking = coal.rank_coalitions(instance)
        result = {"ranking": [{"coalition": str(c), "cost": v} for c, v in ranking]}
        summary = f"{len(ranking)} coalitions ranked"

    elif cmd == "solve-core":
        seq = stab.greedy_core_sequence(instance)
        p = canonical_partition((c for c, _ in seq), instance.n)
        used.update(b.mask for b in p.blocks)
        result = {
            "partition": str(p),
            "blocks": _block_costs(p, instance),
            "selection_order": [{"block": str(c), "cost": v} for c, v in seq],
        }
        costs = ", ".join(f"{fmt(coal.egalitarian_cost(b, instance)):.12g}" for b in p.blocks)
        summary = f"partition {p} with costs {costs}"

    elif cmd == "check-core":
        p = _partition_arg(args.partition, instance, "--partition")
        used.update(b.mask for b in p.blocks)
        blocker = stab.find_blocking_coalition(p, instance)
        result = {"partition": str(p), "blocks": _block_costs(p, instance), "blocking_coalition": None}
        if blocker is None:
            status, summary = "STABLE", "STABLE"
        else:
            used.add(blocker.mask)
            status, code = "VIOLATION", 2
            result["blocking_coalition"] = str(blocker)
            summary = f"blocked by {blocker}"

    elif cmd == "find-core-all":
        found = stab.all_core_stable_partitions(instance, jobs=args.jobs)
        for p in found:
            used.update(b.mask for b in p.blocks)
        total = stab.bell_number(instance.n)
        result = {"partitions": [str(p) for p in found], "examined": total}
        summary = f"{len(found)} core-stable partition(s) ({total} partitions examined)"

    elif cmd == "check-nash":
        p = _partition_arg(args.partition, instance, "--partition")
        used.update(b.mask for b in p.blocks)
        moves = stab.check_nash(p, instance)
        used.update(m.destination.mask for m in moves)
        result = {"partition": str(p), "blocks": _block_costs(p, instance), "deviations": [_move(m) for m in moves]}
        if moves:
            status, code = "VIOLATION", 2
            summary = f"{len(moves)} improving deviation(s)"
        else:
            status, summary = "STABLE", "STABLE"

    elif cmd == "find-nash":
        p, examined = stab.nash_search(instance, jobs=args.jobs)
        result = {"partition": None if p is None else str(p), "examined": examined}
        if p is None:
            status, summary = "NONE", f"NONE ({examined} partitions examined)"
        else:
            used.update(b.mask for b in p.blocks)
            status, summary = "FOUND", f"{p} ({examined} partitions examined)"

    elif cmd == "dynamics":
        start = (
            _partition_arg(args.start, instance, "--start")
            if args.start
            else canonical_partition((Coalition(1 << i) for i in range(instance.n)), instance.n)
        )
        try:
            trace = stab.best_response_dynamics(instance, start, args.max_steps)
        except StepLimitExceeded as exc:
            trace = exc.trace
            code = 1
            print(f"error: {exc}", file=sys.stderr)
        for s in trace.states:
            used.update(b.mask for b in s.blocks)
        result = _trace(trace)
        status = result["terminal"]
        if trace.terminal == "cycle":
            summary = f"CYCLE length {trace.cycle_length}"
        elif trace.terminal == "fixed_point":
            summary = f"FIXED_POINT after {len(trace.moves)} move(s)"
        else:
            summary = f"STEP_LIMIT after {len(trace.moves)} move(s)"

    else:  # pragma: no cover - argparse restricts choices
        raise UnknownCommand(cmd)

    # --jobs is left out so serial and parallel runs print identical reports
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "instance", "jobs")}
    report = {
        "command": cmd,
        "instance": args.instance,
        "flags": flags,
        "digest": instance_digest(instance),
        "status": status,
        "summary": summary,
        "result": result,
        "evaluations": [_evaluation(Coalition(m), instance) for m in sorted(used)],
    }
    return code, report


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jurisdictions", description="Egalitarian jurisdiction-formation solver.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command", parser_class=_Parser)

    def add(name, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("instance", help="instance file path or shipped fixture name")
        return p

    add("evaluate", "evaluate one coalition").add_argument("--coalition", required=True, help='e.g. "1,2,3"')
    add("rank", "rank all coalitions by egalitarian cost")
    add("solve-core", "greedy core-stable partition")
    add("check-core", "look for a blocking coalition").add_argument("--partition", required=True, help='e.g. "1|2,3|4,5,6"')
    p = add("find-core-all", "all core-stable partitions (exhaustive)")
    p.add_argument("--jobs", type=int, default=1)
    add("check-nash", "list improving single-agent deviations").add_argument("--partition", required=True)
    p = add("find-nash", "first Nash-stable partition (exhaustive)")
    p.add_argument("--jobs", type=int, default=1)
    p = add("dynamics", "best-response dynamics with cycle detection")
    p.add_argument("--start", help="initial partition (default: all singletons)")
    p.add_argument("--max-steps", type=int, default=1000)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "jobs", 1) < 1:
            raise BadFlag("--jobs must be at least 1")
        if getattr(args, "max_steps", 1) < 1:
            raise BadFlag("--max-steps must be at least 1")
        code, report = run(args)
    except (GameError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(json.dumps(_round(report), indent=2) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
