#!/usr/bin/env python3
"""Re-check every report in a JSON-lines file from scratch.

For each report: replay the witness script, compare the canonical key and
tree, re-run the typing rules, re-validate L and every Delta, and recompute
the Riemann-Roch bound.  Exit status 1 if anything disagrees.
"""
import argparse
import json
import sys

from jsieve.canon import canonical_key
from jsieve.curve_types import TypeAssignment, check_assignment
from jsieve.lattice import divisor_from_json, rr_lower_bound
from jsieve.linear import validate_Delta, validate_L
from jsieve.tree import BlowupScript, replay, tree_from_json


def audit(rep, allow_no_type1, allow_negative):
    problems = []
    t = replay(BlowupScript.parse("\n".join(rep["script"])))
    if canonical_key(t).decode() != rep["key"] or tree_from_json(rep["tree"]) != t:
        problems.append("script does not replay to the reported tree")
    ta = TypeAssignment.from_json(rep["assignment"])
    problems += [str(v) for v in check_assignment(t, ta, require_type1=not allow_no_type1)]
    L = divisor_from_json(rep["L"])
    problems += [f"{r}: {d}" for r, ok, d in validate_L(t, ta, L, allow_negative) if not ok]
    if rr_lower_bound(t, L) != rep["rr_bound"]:
        problems.append(f"rr bound {rr_lower_bound(t, L)} != {rep['rr_bound']}")
    for D in rep["Delta"]:
        problems += [f"{r}: {d}" for r, ok, d in validate_Delta(t, ta, L, divisor_from_json(D)) if not ok]
    return problems


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("reports")
    ap.add_argument("--allow-no-type1", action="store_true")
    ap.add_argument("--allow-negative-L", action="store_true")
    args = ap.parse_args()

    n = bad = 0
    with open(args.reports) as fh:
        for line in fh:
            rep = json.loads(line)
            if rep.get("kind") != "report":
                continue
            n += 1
            problems = audit(rep, args.allow_no_type1, args.allow_negative_L)
            if problems:
                bad += 1
                print(rep["key"], *problems, sep="\n  ")
    print(f"{n} reports, {bad} with problems")
    sys.exit(1 if bad else 0)


if __name__ == "__main__":
    main()
