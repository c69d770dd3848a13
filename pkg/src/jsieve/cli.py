"""Command-line driver.

Exit codes: 0 success/clean, 1 constraint violations, 2 input error,
3 resource abort.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import load_config
from .curve_types import RULES, TypeAssignment, check_assignment
from .dot import to_dot
from .lattice import DivisorClass, determinant_labels, divisor_from_json, divisor_to_json, rr_lower_bound
from .linear import PreconditionError, SolveFailure, candidate_Ls, solve_Delta, validate_Delta, validate_L
from .search import search
from .tree import (BlowupScript, ScriptError, TreeError, check_invariants, final_curves, realizable,
                   replay, tree_from_json, tree_to_json)

OK, VIOLATIONS, INPUT_ERROR, ABORTED = 0, 1, 2, 3


class InputError(Exception):
    pass


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_tree(path: str):
    try:
        return tree_from_json(_read_json(path))
    except TreeError as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_types(path: str, t):
    try:
        ta = TypeAssignment.from_json(_read_json(path))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    if set(ta.types) != set(t.ids()):
        raise InputError(f"{path}: assignment must cover exactly the tree's vertices")
    return ta


def _load_divisor(path: str, t) -> DivisorClass:
    try:
        d = divisor_from_json(_read_json(path))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    unknown = d.support() - set(t.ids())
    if unknown:
        raise InputError(f"{path}: coefficients on unknown vertices {sorted(unknown)}")
    return d


def _dump(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


# -- subcommands --------------------------------------------------------------

def cmd_replay(args) -> int:
    try:
        text = Path(args.script).read_text()
    except OSError as exc:
        raise InputError(str(exc)) from None
    try:
        t = replay(BlowupScript.parse(text))
    except ScriptError as exc:
        raise InputError(f"{args.script}: {exc}") from None
    _dump(tree_to_json(t))
    return OK


def cmd_check(args) -> int:
    t = _load_tree(args.tree)
    problems = [str(v) for v in check_invariants(t)]
    if not realizable(t):
        problems.append("[realizable] no sequence of blow-downs reaches the projective plane")
    for p in problems:
        print(p)
    if not problems:
        print("clean")
    return VIOLATIONS if problems else OK


def cmd_finals(args) -> int:
    t = _load_tree(args.tree)
    if not realizable(t):
        print("tree is not realizable", file=sys.stderr)
        return VIOLATIONS
    _dump(sorted(final_curves(t)))
    return OK


def cmd_det_labels(args) -> int:
    t = _load_tree(args.tree)
    _dump({str(k): v for k, v in determinant_labels(t).items()})
    return OK


def cmd_audit(args) -> int:
    t = _load_tree(args.tree)
    ta = _load_types(args.types, t)
    lines: list[tuple[str, bool, str]] = []
    inv = check_invariants(t)
    lines.append(("invariants", not inv, "; ".join(map(str, inv)) or "label invariants hold"))
    real = realizable(t)
    lines.append(("realizable", real, "reduces to the projective plane" if real else "not realizable"))
    if real:
        finals = final_curves(t)
        bad = check_assignment(t, ta, finals, require_type1=not args.allow_no_type1)
        rules = [r for r in RULES if r != "C11" or not args.allow_no_type1]
        for rule in rules:
            hits = [v for v in bad if v.rule == rule]
            lines.append((rule, not hits, "; ".join(v.detail for v in hits) or RULES[rule]))
    if args.L:
        L = _load_divisor(args.L, t)
        lines.extend(validate_L(t, ta, L, args.allow_negative_L))
        if L.is_integral():
            lines.append(("rr_bound", True, f"L(L-K)/2+1 = {rr_lower_bound(t, L)}"))
        if args.Delta:
            D = _load_divisor(args.Delta, t)
            lines.extend(validate_Delta(t, ta, L, D))
    for rule, ok, detail in lines:
        print(f"{'PASS' if ok else 'FAIL'} {rule}: {detail}")
    return OK if all(ok for _, ok, _ in lines) else VIOLATIONS


def cmd_solve(args) -> int:
    t = _load_tree(args.tree)
    ta = _load_types(args.types, t)
    try:
        sols = candidate_Ls(t, ta, args.allow_negative_L, args.kernel_box,
                            require_type1=not args.allow_no_type1)
    except PreconditionError as exc:
        _dump({"status": "precondition", "detail": str(exc)})
        return VIOLATIONS
    except SolveFailure as exc:
        out = {"status": "failed", "code": exc.code, "detail": str(exc)}
        if "kernel" in exc.data:
            out["kernel"] = [{str(k): v for k, v in kv.items()} if isinstance(kv, dict) else kv
                             for kv in exc.data["kernel"]]
        _dump(out)
        return VIOLATIONS
    solutions = []
    for sol in sols:
        ds = solve_Delta(t, ta, sol.L, args.delta_cap, args.result_cap)
        solutions.append({
            "L": divisor_to_json(sol.L),
            "rr_bound": str(rr_lower_bound(t, sol.L)),
            "Delta": [divisor_to_json(s.Delta) for s in ds.solutions],
            "delta_truncated": ds.truncated,
            "delta_cap_touched": ds.cap_touched,
        })
    _dump({"status": "ok", "solutions": solutions})
    return OK


def cmd_search(args) -> int:
    overrides = {
        "max_blowups": args.depth,
        "delta_cap": args.delta_cap,
        "result_cap": args.result_cap,
        "score_threshold": args.score_threshold,
        "workers": args.workers,
        "kernel_box": args.kernel_box,
        "max_trees": args.max_trees,
        "time_limit": args.time_limit,
        # store_true flags only override when set
        "allow_negative_L": args.allow_negative_L or None,
        "allow_no_type1": args.allow_no_type1 or None,
        "verbose_trace": args.verbose_trace or None,
    }
    try:
        config = load_config(args.config, overrides)
    except (OSError, ValueError, TypeError) as exc:
        raise InputError(f"bad configuration: {exc}") from None
    result = search(config)
    lines = result.report_lines()
    summary = json.dumps(result.summary, sort_keys=True)
    if args.out:
        Path(args.out).write_text("".join(line + "\n" for line in lines))
        print(summary, file=sys.stderr)
    else:
        for line in lines:
            print(line)
        print(summary)
    if args.summary_json:
        Path(args.summary_json).write_text(summary + "\n")
    if args.emit_dot:
        outdir = Path(args.emit_dot)
        outdir.mkdir(parents=True, exist_ok=True)
        for n, rec in enumerate(r for r in result.records if r.passed):
            deltas = [s.Delta for s in rec.deltas.solutions]
            dot = to_dot(rec.node.tree, rec.assignment.types, rec.L, deltas, name=f"report{n}")
            (outdir / f"report_{n:05d}.dot").write_text(dot)
    return OK if result.summary["complete"] else ABORTED


def cmd_export_dot(args) -> int:
    t = _load_tree(args.tree)
    types = _load_types(args.types, t).types if args.types else None
    sys.stdout.write(to_dot(t, types))
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jsieve", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("replay", help="replay a blowup script and print the tree JSON")
    s.add_argument("script")
    s.set_defaults(func=cmd_replay)

    s = sub.add_parser("check", help="label invariants and realizability")
    s.add_argument("tree")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("finals", help="ids of final curves")
    s.add_argument("tree")
    s.set_defaults(func=cmd_finals)

    s = sub.add_parser("det-labels", help="determinant label of every vertex")
    s.add_argument("tree")
    s.set_defaults(func=cmd_det_labels)

    s = sub.add_parser("audit", help="validate types, and optionally L and Delta, rule by rule")
    s.add_argument("tree")
    s.add_argument("types")
    s.add_argument("L", nargs="?")
    s.add_argument("Delta", nargs="?")
    s.add_argument("--allow-negative-L", action="store_true")
    s.add_argument("--allow-no-type1", action="store_true")
    s.set_defaults(func=cmd_audit)

    s = sub.add_parser("solve", help="solve for L and Delta on a typed tree")
    s.add_argument("tree")
    s.add_argument("types")
    s.add_argument("--delta-cap", type=int, default=64)
    s.add_argument("--result-cap", type=int, default=128)
    s.add_argument("--kernel-box", type=int, default=1,
                   help="coset search radius when L is underdetermined")
    s.add_argument("--allow-negative-L", action="store_true")
    s.add_argument("--allow-no-type1", action="store_true")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("search", help="enumerate trees and run the full filter pipeline")
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--config", help="JSON file with RunConfig fields")
    s.add_argument("--delta-cap", type=int)
    s.add_argument("--result-cap", type=int)
    s.add_argument("--score-threshold", type=int)
    s.add_argument("--workers", type=int)
    s.add_argument("--kernel-box", type=int)
    s.add_argument("--max-trees", type=int)
    s.add_argument("--time-limit", type=float)
    s.add_argument("--allow-negative-L", action="store_true")
    s.add_argument("--allow-no-type1", action="store_true")
    s.add_argument("--verbose-trace", action="store_true")
    s.add_argument("--out", help="write report lines here (summary goes to stderr)")
    s.add_argument("--summary-json")
    s.add_argument("--emit-dot", metavar="DIR")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("export-dot", help="DOT rendering of a tree")
    s.add_argument("tree")
    s.add_argument("--types")
    s.set_defaults(func=cmd_export_dot)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
