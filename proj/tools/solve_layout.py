#!/usr/bin/env python3
"""Search for 10 farm coordinates (km) with the built-in coreness structure.

At a 4 km threshold the graph must be the 5-clique {2,4,5,7,9} plus the
spokes 1-5, 1-4, 10-5, 10-2, 8-5, 6-4, 3-7. Every spoke is longer than
`--spoke-min` so the network is still disconnected just below 4 km, and every
pair lies within 8.5 km so the graph is complete there.
"""
import argparse
import itertools

import numpy as np
from scipy.optimize import minimize

CORE = [2, 4, 5, 7, 9]
SPOKES = [(1, 5), (1, 4), (10, 5), (10, 2), (8, 5), (6, 4), (3, 7)]


def pairs():
    edges = {tuple(sorted(e)) for e in itertools.combinations(CORE, 2)}
    edges |= {tuple(sorted(e)) for e in SPOKES}
    spokes = {tuple(sorted(e)) for e in SPOKES}
    for i, j in itertools.combinations(range(1, 11), 2):
        yield i, j, (i, j) in edges, (i, j) in spokes


def penalty(flat, args):
    p = flat.reshape(10, 2)
    total = 0.0
    for i, j, is_edge, is_spoke in pairs():
        d = np.linalg.norm(p[i - 1] - p[j - 1])
        if is_edge:
            total += max(0.0, d - (4.0 - args.margin)) ** 2
        else:
            total += max(0.0, (4.0 + args.margin) - d) ** 2
        if is_spoke:
            total += max(0.0, args.spoke_min - d) ** 2
        total += max(0.0, d - (8.5 - args.margin)) ** 2
        total += max(0.0, args.min_sep - d) ** 2
    return total


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--margin", type=float, default=0.1)
    ap.add_argument("--spoke-min", type=float, default=3.6)
    ap.add_argument("--min-sep", type=float, default=1.0)
    ap.add_argument("--tries", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    for t in range(args.tries):
        x0 = rng.uniform(0.0, 8.0, size=20)
        res = minimize(penalty, x0, args=(args,), method="L-BFGS-B")
        if res.fun < 1e-14:
            p = res.x.reshape(10, 2)
            p -= p.min(axis=0)
            p = np.round(p, 2)
            if penalty(p.ravel(), argparse.Namespace(**{**vars(args), "margin": 0.02})) == 0.0:
                print(f"# found after {t + 1} tries")
                print("node_id,x_km,y_km")
                for k, (x, y) in enumerate(p, start=1):
                    print(f"{k},{x:.2f},{y:.2f}")
                return
    raise SystemExit("no layout found")


if __name__ == "__main__":
    main()
