#!/usr/bin/env python3
"""Sampling-free witness values from every exact route that fits the budget."""

import argparse

from pmpublic.harness.exact import EnumerationTooLarge, exact_sigma
from pmpublic.harness.estimate import closed_form_sigma


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=3)
    args = ap.parse_args()

    routes = [("replace", "channel"), ("replace", "recursion"), ("replace", "enumerate"), ("distinct", "recursion"), ("distinct", "enumerate")]
    print(f"{'n':>2} {'closed form':>12} " + " ".join(f"{m[:4]}/{r[:5]:>5}" for m, r in routes))
    for n in range(args.max_n + 1):
        cells = []
        for mode, method in routes:
            try:
                cells.append(f"{exact_sigma(n, mode, method=method):>10.6f}")
            except EnumerationTooLarge:
                cells.append(f"{'--':>10}")
        print(f"{n:>2} {closed_form_sigma(n):12.6f} " + " ".join(cells))


if __name__ == "__main__":
    main()
