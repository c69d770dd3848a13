#!/usr/bin/env python3
"""Print the number of isomorphism classes of blowup trees per depth."""
import argparse
import time

from jsieve.search import enumerate_trees


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("depth", type=int, nargs="?", default=8)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    start = time.perf_counter()
    counts = {}
    for node in enumerate_trees(args.depth, workers=args.workers):
        counts[node.depth] = counts.get(node.depth, 0) + 1
    for d, c in sorted(counts.items()):
        print(f"{d:3d} {c:8d}")
    print(f"total {sum(counts.values())} in {time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
