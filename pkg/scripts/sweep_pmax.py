#!/usr/bin/env python3
"""Tabulate the optimal success probability over a parameter grid.

Writes the same CSV the ``entrot sweep`` subcommand produces and prints
a short summary: where the protocol is most/least likely to succeed and
how the two optimum regimes split the grid.

Example:
    python3 scripts/sweep_pmax.py --points 40 --out pmax_grid.csv
"""

import argparse
import collections
import math

import numpy as np

from entrot.cli import main as cli_main
from entrot.entanglement import average_cost
from entrot.povm import ProtocolParams, optimum


def run(args: argparse.Namespace) -> int:
    lo, hi = args.min_pi, args.max_pi
    grid = [f"{lo}pi:{hi}pi:{args.points}"] * 2
    code = cli_main(["sweep", "--theta-grid", grid[0],
                     "--alpha-grid", grid[1], "--out", args.out])
    if code != 0:
        return code

    cases = collections.Counter()
    best = (0.0, None)
    worst = (2.0, None)
    cheap = (math.inf, None)
    for theta in np.linspace(lo * math.pi, hi * math.pi, args.points):
        for alpha in np.linspace(lo * math.pi, hi * math.pi, args.points):
            params = ProtocolParams(float(theta), float(alpha))
            opt = optimum(params)
            cases[opt.case.value] += 1
            if opt.p_max > best[0]:
                best = (opt.p_max, params)
            if opt.p_max < worst[0]:
                worst = (opt.p_max, params)
            cost = average_cost(params).avg_cost
            if cost < cheap[0]:
                cheap = (cost, params)

    def spot(pair):
        value, params = pair
        return (f"{value:.6f} at theta={params.theta / math.pi:.3f}pi, "
                f"alpha={params.alpha / math.pi:.3f}pi")

    total = sum(cases.values())
    print(f"wrote {args.out} ({total} grid points)")
    print(f"  best success probability : {spot(best)}")
    print(f"  worst success probability: {spot(worst)}")
    print(f"  cheapest average cost    : {spot(cheap)} ebits")
    for label in sorted(cases):
        print(f"  optimum regime {label:<9}: {cases[label]} points")
    return 0


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=30,
                        help="grid points per axis (default 30)")
    parser.add_argument("--min-pi", type=float, default=0.05,
                        help="lower bound for both angles, in pi units")
    parser.add_argument("--max-pi", type=float, default=0.5,
                        help="upper bound for both angles, in pi units")
    parser.add_argument("--out", default="pmax_grid.csv",
                        help="CSV output path (default pmax_grid.csv)")
    return run(parser.parse_args())


if __name__ == "__main__":
    raise SystemExit(main())
