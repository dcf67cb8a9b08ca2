"""Command-line front end.

Subcommands: solve, enumerate, validate, gadget-verify, reduce, lift,
extract, audit, render. Machine output is JSON on standard output (or the
`--out` file; `-` means standard output); human summaries go to standard
error. Exit codes: 0 success / solution found; 1 valid run with a negative
answer (unsat, violations, audit mismatch, budget exceeded); 2 usage or
input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import (
    entryexit,
    gadgets,
    grandtour,
    metacell,
    reducer,
    render as render_mod,
    yagit,
    zahlen,
)
from ._search import BudgetExceeded


class _CliError(Exception):
    """Fatal usage/input problem; message goes to stderr, exit code 2."""


# ============================================================ puzzle registry


class _Puzzle:
    def __init__(self, inst_from_json, sol_to_json, sol_from_json,
                 validate, enumerate_fn):
        self.inst_from_json = inst_from_json
        self.sol_to_json = sol_to_json
        self.sol_from_json = sol_from_json
        self.validate = validate
        self.enumerate = enumerate_fn  # (inst, cap, node_budget) or None


_PUZZLES: dict[str, _Puzzle] = {
    "grandtour": _Puzzle(
        grandtour.GrandTourInstance.from_json,
        grandtour.solution_to_json,
        grandtour.solution_from_json,
        grandtour.validate,
        lambda inst, cap, nb: grandtour.enumerate(inst, cap, node_budget=nb),
    ),
    "entryexit": _Puzzle(
        entryexit.EntryExitInstance.from_json,
        entryexit.loop_to_json,
        entryexit.loop_from_json,
        entryexit.validate,
        lambda inst, cap, nb: entryexit.enumerate(inst, cap, node_budget=nb),
    ),
    "yagit": _Puzzle(
        yagit.YagitInstance.from_json,
        yagit.solution_to_json,
        yagit.solution_from_json,
        yagit.validate,
        None,  # bounded solver only; no exhaustive enumerator
    ),
    "zahlen": _Puzzle(
        zahlen.ZahlenInstance.from_json,
        zahlen.path_to_json,
        zahlen.path_from_json,
        zahlen.validate,
        lambda inst, cap, nb: zahlen.enumerate(inst, cap, node_budget=nb),
    ),
    "tmetacell": _Puzzle(
        metacell.MetacellGridInstance.from_json,
        metacell.cycle_to_json,
        metacell.cycle_from_json,
        metacell.validate_cycle,
        lambda inst, cap, nb: metacell.enumerate_cycles(
            inst, cap=cap, node_budget=nb
        ),
    ),
}


# ============================================================ plumbing


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise _CliError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise _CliError(f"malformed JSON in {path}: {exc}") from None


def _build(ctor, data, path: str, what: str):
    try:
        return ctor(data)
    except (KeyError, TypeError, ValueError) as exc:
        key = f" (key {exc})" if isinstance(exc, KeyError) else ""
        raise _CliError(f"invalid {what} in {path}{key}: {exc}") from None


def _load_instance(puzzle: str, path: str):
    return _build(_PUZZLES[puzzle].inst_from_json, _load_json(path),
                  path, f"{puzzle} instance")


def _load_solution(puzzle: str, path: str):
    return _build(_PUZZLES[puzzle].sol_from_json, _load_json(path),
                  path, f"{puzzle} solution")


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _emit_json(doc, out: str | None) -> None:
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", out)


def _parse_limits(spec: str) -> tuple[int, int]:
    """'nodes=K,lines=L' (either order, both optional) -> (lines, nodes)."""
    vals = {"nodes": 200000, "lines": 64}
    if spec:
        for part in spec.split(","):
            key, _, num = part.partition("=")
            if key not in vals or not num.lstrip("-").isdigit():
                raise _CliError(
                    f"bad --limits entry {part!r}; expected nodes=K,lines=L"
                )
            vals[key] = int(num)
    return (vals["lines"], vals["nodes"])


# ============================================================ subcommands


def _cmd_solve(args) -> int:
    inst = _load_instance(args.puzzle, args.instance)
    p = _PUZZLES[args.puzzle]
    try:
        if args.puzzle == "yagit":
            result = yagit.solve(inst, _parse_limits(args.limits))
            _emit_json(result.to_json(), args.out)
            _say(f"yagit solve: {result.status} after {result.nodes} nodes")
            return 0 if result.status == "solved" else 1
        if args.puzzle == "grandtour":
            sol = grandtour.solve(inst, node_budget=args.node_budget)
        elif args.puzzle == "entryexit":
            sol = entryexit.solve(inst)
        elif args.puzzle == "zahlen":
            sol = zahlen.solve(inst)
        else:
            sol = metacell.solve(inst)
    except BudgetExceeded as exc:
        _emit_json({"status": "budget-exceeded", "detail": str(exc)}, args.out)
        _say(f"{args.puzzle} solve: {exc}")
        return 1
    if sol is None:
        _emit_json({"status": "unsat"}, args.out)
        _say(f"{args.puzzle} solve: no solution")
        return 1
    _emit_json(p.sol_to_json(sol), args.out)
    _say(f"{args.puzzle} solve: solution found")
    return 0


def _cmd_enumerate(args) -> int:
    p = _PUZZLES[args.puzzle]
    if p.enumerate is None:
        raise _CliError(
            f"{args.puzzle} has no exhaustive enumerator; use solve"
        )
    inst = _load_instance(args.puzzle, args.instance)
    try:
        sols, truncated = p.enumerate(inst, args.cap, args.node_budget)
    except BudgetExceeded as exc:
        _emit_json({"status": "budget-exceeded", "detail": str(exc)}, args.out)
        _say(f"{args.puzzle} enumerate: {exc}")
        return 1
    doc = {
        "count": len(sols),
        "truncated": truncated,
        "solutions": [p.sol_to_json(s) for s in sols],
    }
    _emit_json(doc, args.out)
    _say(
        f"{args.puzzle} enumerate: {len(sols)} solution(s)"
        + (" (truncated)" if truncated else "")
    )
    return 0 if sols else 1


def _cmd_validate(args) -> int:
    inst = _load_instance(args.puzzle, args.instance)
    sol = _load_solution(args.puzzle, args.solution)
    violations = _PUZZLES[args.puzzle].validate(inst, sol)
    doc = {"violations": violations}
    if args.puzzle == "entryexit":
        doc["notes"] = entryexit.instance_notes(inst)
    _emit_json(doc, args.out)
    _say(f"{args.puzzle} validate: {len(violations)} violation(s)")
    return 0 if not violations else 1


def _cmd_gadget_verify(args) -> int:
    try:
        g = gadgets.builtin(args.name, args.block_n)
    except (LookupError, ValueError) as exc:
        raise _CliError(str(exc)) from None
    try:
        report = gadgets.verify_gadget(
            g, cap=args.cap, node_budget=args.node_budget
        )
    except BudgetExceeded as exc:
        _emit_json({"status": "budget-exceeded", "detail": str(exc)}, args.out)
        _say(f"gadget-verify {args.name}: {exc}")
        return 1
    except gadgets.UnsupportedGadgetError as exc:
        raise _CliError(str(exc)) from None
    _emit_json(report.to_json(), args.out)
    ok = (
        report.all_pairs_feasible
        and not report.spurious
        and report.forced_ok is not False
    )
    _say(
        f"gadget-verify {g.name}: "
        + ("all port pairs feasible" if ok else "FAILED certification")
    )
    return 0 if ok else 1


def _cmd_reduce(args) -> int:
    inst = _build(
        metacell.MetacellGridInstance.from_json,
        _load_json(args.source), args.source, "tmetacell instance",
    )
    try:
        red = reducer.reduce(inst, args.target, block_n=args.block_n)
    except reducer.ReductionError as exc:
        raise _CliError(str(exc)) from None
    stem = args.out if args.out else str(Path(args.source).with_suffix("")) \
        + f".{args.target}"
    inst_path = stem + ".instance.json"
    trace_path = stem + ".trace.json"
    Path(inst_path).write_text(
        json.dumps(red.instance.to_json(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    Path(trace_path).write_text(
        json.dumps(red.trace, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    _emit_json(
        {"target": args.target, "instance": inst_path, "trace": trace_path},
        None,
    )
    _say(f"reduce: wrote {inst_path} and {trace_path}")
    return 0


def _cmd_lift(args) -> int:
    trace = _load_json(args.trace)
    cycle = _build(metacell.cycle_from_json, _load_json(args.cycle),
                   args.cycle, "source cycle")
    target = trace.get("target")
    if target not in _PUZZLES:
        raise _CliError(f"trace {args.trace} names unknown target {target!r}")
    try:
        sol = reducer.lift(trace, cycle)
    except (ValueError, KeyError) as exc:
        _emit_json({"error": str(exc)}, args.out)
        _say(f"lift: {exc}")
        return 1
    _emit_json(_PUZZLES[target].sol_to_json(sol), args.out)
    _say(f"lift: {target} solution produced")
    return 0


def _cmd_extract(args) -> int:
    trace = _load_json(args.trace)
    target = trace.get("target")
    if target not in _PUZZLES:
        raise _CliError(f"trace {args.trace} names unknown target {target!r}")
    sol = _load_solution(target, args.solution)
    try:
        cycle = reducer.extract(trace, sol)
    except reducer.ExtractionError as exc:
        _emit_json({"error": str(exc)}, args.out)
        _say(f"extract: {exc}")
        return 1
    _emit_json(metacell.cycle_to_json(cycle), args.out)
    _say("extract: source cycle recovered")
    return 0


def _cmd_audit(args) -> int:
    if args.source:
        inst = _build(
            metacell.MetacellGridInstance.from_json,
            _load_json(args.source), args.source, "tmetacell instance",
        )
    else:
        if args.rows is None or args.cols is None:
            raise _CliError(
                "audit needs a source instance file, or --seed with "
                "--rows/--cols for a sampled one"
            )
        inst = metacell.random_instance(
            args.seed, args.rows, args.cols, args.forced_mode
        )
    try:
        report = reducer.audit_bijection(
            inst, args.target, cap=args.cap,
            node_budget=args.node_budget, block_n=args.block_n,
        )
    except (reducer.ReductionError, BudgetExceeded) as exc:
        _emit_json({"error": str(exc)}, args.out)
        _say(f"audit: {exc}")
        return 1
    _emit_json(report.to_json(), args.out)
    _say(
        f"audit {args.target}: verdict={report.verdict} "
        f"(source={report.source_count}, target={report.target_count})"
    )
    return 0 if report.verdict in ("bijective", "surjective-only") else 1


def _cmd_render(args) -> int:
    if args.format == "json":
        raise _CliError("render emits ascii or svg; use --format ascii|svg")
    if args.gadget:
        if args.instance or args.solution:
            raise _CliError("--gadget and instance/solution are exclusive")
        try:
            obj = gadgets.builtin(args.gadget, args.block_n)
        except (LookupError, ValueError) as exc:
            raise _CliError(str(exc)) from None
        sol = None
    else:
        if not args.puzzle or not args.instance:
            raise _CliError("render needs --puzzle and an instance file, "
                            "or --gadget NAME")
        obj = _load_instance(args.puzzle, args.instance)
        sol = (
            _load_solution(args.puzzle, args.solution)
            if args.solution else None
        )
    _emit(render_mod.render(obj, sol, fmt=args.format), args.out)
    _say(f"render: {args.format} document produced")
    return 0


# ============================================================ parser


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="tmetakit",
        description="Solvers, gadget atlas, and Hamiltonicity reductions "
        "for grid pencil puzzles.",
    )
    sub = top.add_subparsers(dest="command", required=True)
    puzzles = sorted(_PUZZLES)

    def add_common(sp, out=True):
        if out:
            sp.add_argument("--out", default=None,
                            help="output path; '-' = stdout (default)")

    sp = sub.add_parser("solve", help="find one solution")
    sp.add_argument("--puzzle", required=True, choices=puzzles)
    sp.add_argument("instance")
    sp.add_argument("--limits", default="",
                    help="yagit only: nodes=K,lines=L")
    sp.add_argument("--node-budget", type=int, default=None)
    add_common(sp)
    sp.set_defaults(fn=_cmd_solve)

    sp = sub.add_parser("enumerate", help="list all solutions up to a cap")
    sp.add_argument("--puzzle", required=True, choices=puzzles)
    sp.add_argument("instance")
    sp.add_argument("--cap", type=int, default=1000)
    sp.add_argument("--node-budget", type=int, default=None)
    add_common(sp)
    sp.set_defaults(fn=_cmd_enumerate)

    sp = sub.add_parser("validate", help="check a solution against an instance")
    sp.add_argument("--puzzle", required=True, choices=puzzles)
    sp.add_argument("instance")
    sp.add_argument("solution")
    add_common(sp)
    sp.set_defaults(fn=_cmd_validate)

    sp = sub.add_parser("gadget-verify", help="certify a gadget's port pairs")
    sp.add_argument("name", help="atlas name, e.g. gt5, ee7, yagit3, zs3")
    sp.add_argument("--block-n", type=int, default=None,
                    help="family size for gt{4n+1}; value band for zs3")
    sp.add_argument("--cap", type=int, default=None)
    sp.add_argument("--node-budget", type=int, default=None)
    add_common(sp)
    sp.set_defaults(fn=_cmd_gadget_verify)

    sp = sub.add_parser("reduce", help="compile a tmetacell instance")
    sp.add_argument("source")
    sp.add_argument("--target", required=True, choices=sorted(reducer.TARGETS))
    sp.add_argument("--block-n", type=int, default=1,
                    help="grandtour block size parameter")
    sp.add_argument("--out", default=None,
                    help="output stem for .instance.json/.trace.json")
    sp.set_defaults(fn=_cmd_reduce)

    sp = sub.add_parser("lift", help="map a source cycle to a target solution")
    sp.add_argument("trace")
    sp.add_argument("cycle")
    add_common(sp)
    sp.set_defaults(fn=_cmd_lift)

    sp = sub.add_parser("extract", help="read a target solution back")
    sp.add_argument("trace")
    sp.add_argument("solution")
    add_common(sp)
    sp.set_defaults(fn=_cmd_extract)

    sp = sub.add_parser("audit", help="compare solution sets across a reduction")
    sp.add_argument("source", nargs="?", default=None)
    sp.add_argument("--target", required=True, choices=sorted(reducer.TARGETS))
    sp.add_argument("--cap", type=int, default=1000)
    sp.add_argument("--block-n", type=int, default=1)
    sp.add_argument("--node-budget", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0,
                    help="sample a source instance (with --rows/--cols)")
    sp.add_argument("--rows", type=int, default=None)
    sp.add_argument("--cols", type=int, default=None)
    sp.add_argument("--forced-mode", default="all",
                    choices=("mixed", "all", "none"))
    add_common(sp)
    sp.set_defaults(fn=_cmd_audit)

    sp = sub.add_parser("render", help="draw an instance, solution, or gadget")
    sp.add_argument("instance", nargs="?", default=None)
    sp.add_argument("solution", nargs="?", default=None)
    sp.add_argument("--puzzle", choices=puzzles)
    sp.add_argument("--gadget", default=None, help="atlas gadget name")
    sp.add_argument("--block-n", type=int, default=None)
    sp.add_argument("--format", default="ascii",
                    choices=("json", "ascii", "svg"))
    add_common(sp)
    sp.set_defaults(fn=_cmd_render)

    return top


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.fn(args)
    except _CliError as exc:
        _say(f"error: {exc}")
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
