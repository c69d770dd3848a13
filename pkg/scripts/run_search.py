#!/usr/bin/env python3
"""Run the search at one depth under the default and the relaxed configs.

Writes <out>/<name>/reports.jsonl and summary.json for each config and
prints the rejection histograms side by side.
"""
import argparse
import json
from pathlib import Path

from jsieve.config import RunConfig
from jsieve.search import search

CONFIGS = {
    "default": {},
    # no type-1 curve required, negative L allowed, every solved candidate reported
    "relaxed": {"allow_no_type1": True, "allow_negative_L": True, "score_threshold": -10**9},
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--depth", type=int, default=8)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results")
    ap.add_argument("--only", choices=sorted(CONFIGS))
    args = ap.parse_args()

    summaries = {}
    for name, extra in CONFIGS.items():
        if args.only and name != args.only:
            continue
        res = search(RunConfig(max_blowups=args.depth, workers=args.workers, **extra))
        d = Path(args.out) / f"depth{args.depth}" / name
        d.mkdir(parents=True, exist_ok=True)
        (d / "reports.jsonl").write_text("".join(x + "\n" for x in res.report_lines()))
        (d / "summary.json").write_text(json.dumps(res.summary, sort_keys=True, indent=1) + "\n")
        summaries[name] = res.summary

    stages = sorted({k for s in summaries.values() for k in s["rejections"]})
    print("stage".ljust(16) + "".join(n.rjust(10) for n in summaries))
    for st in stages:
        print(st.ljust(16) + "".join(str(s["rejections"].get(st, 0)).rjust(10) for s in summaries.values()))
    for key in ("L_solved", "rr_non_integral", "reports", "trees_total"):
        print(key.ljust(16) + "".join(str(s[key]).rjust(10) for s in summaries.values()))


if __name__ == "__main__":
    main()
