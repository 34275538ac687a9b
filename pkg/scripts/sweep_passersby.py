#!/usr/bin/env python3
"""Witness versus number of passersby for random pure states.

Writes the per-state rows as CSV and prints a per-n summary against the closed form
and the noncontextual bound. Use ``--rounds 1000000`` for the full-scale run.
"""

import argparse
from pathlib import Path

import numpy as np

from pmpublic.harness.experiments import NC_BOUND, rows_to_csv, sweep_passersby


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--passersby", default="0,1,2,3")
    ap.add_argument("--states", type=int, default=10)
    ap.add_argument("--rounds", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--mode", choices=["replace", "distinct"], default="replace")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("sweep.csv"))
    args = ap.parse_args()

    ns = [int(x) for x in args.passersby.split(",")]
    rows = sweep_passersby(ns, args.states, args.rounds, args.seed, args.mode, args.workers)
    args.out.write_text(rows_to_csv(rows))

    print(f"{'n':>2} {'mean sigma':>11} {'spread':>9} {'closed form':>12} {'> bound':>8}")
    for n in ns:
        cell = [r for r in rows if r.n_passersby == n]
        s = np.array([r.sigma for r in cell])
        print(f"{n:>2} {s.mean():11.6f} {s.std():9.2e} {cell[0].closed_form:12.6f} {int((s > NC_BOUND).sum()):>8}")
    print(f"rows written to {args.out}")


if __name__ == "__main__":
    main()
