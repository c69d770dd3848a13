"""Orderly enumeration of blowup trees and the candidate filter pipeline."""
from __future__ import annotations

import json
import multiprocessing as mp
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .canon import canonical_key
from .config import RunConfig
from .curve_types import TypeAssignment, admissible_assignments
from .lattice import DivisorClass, determinant_label, divisor_to_json, rr_lower_bound
from .linear import DeltaSearch, SolveFailure, candidate_Ls, solve_Delta
from .tree import (BlowupScript, CurveTree, EdgeBlowup, PointBlowup, apply_step,
                   check_invariants, final_curves, initial_tree, tree_to_json)

__all__ = ["canonical_key", "children", "enumerate_trees", "pipeline", "search",
           "CandidateReport", "SearchResult"]

SLOPE_RULE = "strict local minimum forbidden; plateaus allowed; vertices with L=0 excluded"


@dataclass(frozen=True)
class Node:
    key: bytes
    tree: CurveTree
    script: BlowupScript

    @property
    def depth(self) -> int:
        return len(self.script)


def children(t: CurveTree) -> Iterator[tuple[object, CurveTree]]:
    """All one-step blowups of ``t``: every point move, then every edge move."""
    for v in t.ids():
        step = PointBlowup(v)
        yield step, apply_step(t, step)
    for i, j in sorted(t.edges):
        step = EdgeBlowup(i, j)
        yield step, apply_step(t, step)


def _expand(node: Node) -> list[Node]:
    return [Node(canonical_key(c), c, node.script.then(step)) for step, c in children(node.tree)]


def _pool(workers: int):
    return mp.get_context("fork").Pool(workers) if workers > 1 else None


def enumerate_trees(max_blowups: int, visitor: Callable[[Node], None] | None = None,
                    workers: int = 1) -> Iterator[Node]:
    """Every isomorphism class of tree reachable in <= max_blowups blowups,
    once each, depth by depth, sorted by canonical key within a depth."""
    root = initial_tree()
    level = [Node(canonical_key(root), root, BlowupScript())]
    pool = _pool(workers)
    try:
        for depth in range(max_blowups + 1):
            for node in level:
                if visitor is not None:
                    visitor(node)
                yield node
            if depth == max_blowups:
                break
            expanded = pool.map(_expand, level, chunksize=16) if pool else map(_expand, level)
            seen: dict[bytes, Node] = {}
            for kids in expanded:  # parent order is sorted, so first writer is deterministic
                for kid in kids:
                    seen.setdefault(kid.key, kid)
            level = [seen[k] for k in sorted(seen)]
    finally:
        if pool:
            pool.terminate()


# -- pipeline -----------------------------------------------------------------

@dataclass
class CandidateReport:
    node: Node
    assignment: TypeAssignment | None
    L: DivisorClass | None = None
    deltas: DeltaSearch | None = None
    rr_bound: int | None = None
    det_labels: dict = field(default_factory=dict)
    finals: list = field(default_factory=list)
    filter_trace: list = field(default_factory=list)
    passed: bool = False

    def to_json(self) -> dict:
        out = {
            "kind": "report" if self.passed else "rejection",
            "key": self.node.key.decode(),
            "depth": self.node.depth,
            "script": [str(s) for s in self.node.script.steps],
            "tree": tree_to_json(self.node.tree),
            "finals": self.finals,
        }
        if self.assignment is not None:
            out["assignment"] = self.assignment.to_json()
            out["type1_det_labels"] = {str(k): v for k, v in sorted(self.det_labels.items())}
        if self.L is not None:
            out["L"] = divisor_to_json(self.L)
            out["rr_bound"] = self.rr_bound
        if self.deltas is not None:
            out["Delta"] = [divisor_to_json(s.Delta) for s in self.deltas.solutions]
            out["delta_truncated"] = self.deltas.truncated
            out["delta_cap_touched"] = self.deltas.cap_touched
        out["filter_trace"] = [list(x) for x in self.filter_trace]
        return out


@dataclass
class TreeOutcome:
    records: list[CandidateReport]
    rejections: Counter
    rr_checked: int = 0
    rr_non_integral: int = 0
    L_solved: int = 0


def pipeline(t: CurveTree | Node, config: RunConfig = RunConfig()) -> TreeOutcome:
    """Run every filter on one tree.  Emitted reports are in
    ``records`` with ``passed`` set; rejections are kept only in verbose mode."""
    node = t if isinstance(t, Node) else Node(canonical_key(t), t, BlowupScript())
    t = node.tree
    out = TreeOutcome([], Counter())

    def reject(rec: CandidateReport, stage: str, detail: str):
        out.rejections[stage] += 1
        rec.filter_trace.append((stage, "fail", detail))
        if config.verbose_trace:
            out.records.append(rec)

    base = CandidateReport(node, None)
    bad = check_invariants(t)
    if bad:
        reject(base, "invariants", "; ".join(map(str, bad)))
        return out
    base.filter_trace.append(("invariants", "pass", ""))
    finals = final_curves(t)
    base.finals = sorted(finals)
    if not finals:
        reject(base, "finals", "no final curves")
        return out
    tas = admissible_assignments(t, finals, require_type1=not config.allow_no_type1)
    if not tas:
        reject(base, "typing", "no admissible type assignment")
        return out
    base.filter_trace.append(("typing", "pass", f"{len(tas)} assignment(s)"))

    for ta in tas:
        dets = {v: determinant_label(t, v) for v in ta.of_type(1)}
        rec = CandidateReport(node, ta, det_labels=dets, finals=base.finals,
                              filter_trace=list(base.filter_trace))
        nonneg = {v: d for v, d in dets.items() if d >= 0}
        if nonneg:
            reject(rec, "determinant", f"type-1 determinant labels >= 0: {nonneg}")
            continue
        rec.filter_trace.append(("determinant", "pass", ""))
        try:
            sols = candidate_Ls(t, ta, config.allow_negative_L, config.kernel_box, finals,
                                require_type1=not config.allow_no_type1)
        except SolveFailure as exc:
            reject(rec, f"L:{exc.code}", str(exc))
            continue
        for sol in sols:
            out.L_solved += 1
            r = CandidateReport(node, ta, sol.L, det_labels=dets, finals=base.finals,
                                filter_trace=rec.filter_trace + [("L", "pass", "")])
            bound = rr_lower_bound(t, sol.L)
            out.rr_checked += 1
            if bound.denominator != 1:
                out.rr_non_integral += 1
            r.rr_bound = int(bound) if bound.denominator == 1 else None
            ds = solve_Delta(t, ta, sol.L, config.delta_cap, config.result_cap)
            r.deltas = ds
            if not ds.solutions:
                reject(r, "delta", "no Delta within the coefficient cap")
                continue
            r.filter_trace.append(("delta", "pass", f"{len(ds.solutions)} solution(s)"
                                   + (" [truncated]" if ds.truncated else "")))
            if r.rr_bound is None or r.rr_bound < config.score_threshold:
                reject(r, "score", f"rr bound {bound} < {config.score_threshold}")
                continue
            r.filter_trace.append(("score", "pass", f"rr bound {r.rr_bound}"))
            r.passed = True
            out.records.append(r)
    return out


# -- search -------------------------------------------------------------------

@dataclass
class SearchResult:
    records: list[CandidateReport]
    summary: dict

    def report_lines(self) -> list[str]:
        return [json.dumps(r.to_json(), sort_keys=True) for r in self.records]


_WORKER_CONFIG: RunConfig | None = None


def _init_worker(config: RunConfig) -> None:
    global _WORKER_CONFIG
    _WORKER_CONFIG = config


def _run_one(node: Node) -> TreeOutcome:
    return pipeline(node, _WORKER_CONFIG)


def search(config: RunConfig) -> SearchResult:
    """Enumerate every tree up to ``config.max_blowups`` and filter each.

    Output order is (depth, canonical key, assignment, L), independent of
    the number of workers.
    """
    start = time.perf_counter()
    by_depth: Counter = Counter()
    rejections: Counter = Counter()
    records: list[CandidateReport] = []
    rr_checked = rr_bad = solved = 0
    complete = True
    abort_reason = None
    pool = (mp.get_context("fork").Pool(config.workers, _init_worker, (config,))
            if config.workers > 1 else None)
    _init_worker(config)
    try:
        level: list[Node] = []
        current = 0

        def flush(nodes):
            nonlocal rr_checked, rr_bad, solved
            outs = pool.map(_run_one, nodes, chunksize=8) if pool else map(_run_one, nodes)
            for o in outs:
                records.extend(o.records)
                rejections.update(o.rejections)
                rr_checked += o.rr_checked
                rr_bad += o.rr_non_integral
                solved += o.L_solved

        for node in enumerate_trees(config.max_blowups, workers=config.workers):
            if node.depth != current:
                flush(level)
                level, current = [], node.depth
            by_depth[node.depth] += 1
            level.append(node)
            total = sum(by_depth.values())
            if config.max_trees is not None and total > config.max_trees:
                complete, abort_reason = False, f"max_trees {config.max_trees} exceeded"
                level.pop()
                by_depth[node.depth] -= 1
                break
            if config.time_limit is not None and time.perf_counter() - start > config.time_limit:
                complete, abort_reason = False, f"time limit {config.time_limit}s exceeded"
                break
        flush(level)
    finally:
        if pool:
            pool.terminate()

    reached = max((d for d, c in by_depth.items() if c), default=0)
    summary = {
        "kind": "summary",
        "complete": complete,
        "abort_reason": abort_reason,
        "max_blowups": config.max_blowups,
        "depth_reached": reached,
        "trees_by_depth": {str(d): by_depth[d] for d in sorted(by_depth)},
        "trees_total": sum(by_depth.values()),
        "trees_visited": by_depth.get(config.max_blowups, 0),
        "rejections": dict(sorted(rejections.items())),
        "reports": sum(1 for r in records if r.passed),
        "L_solved": solved,
        "rr_checked": rr_checked,
        "rr_non_integral": rr_bad,
        "slope_rule": SLOPE_RULE,
        "config": config.to_json(),
        "wall_time_s (nondeterministic)": round(time.perf_counter() - start, 3),
    }
    return SearchResult(records, summary)
