#!/usr/bin/env python3
"""Sweep the frequency-box sharpness ratio over N for several smoothing gains.

Shows the ratio growing like N^(alpha - 1/2) once alpha exceeds the
half-derivative ceiling, and staying bounded below it.
"""

import argparse

import numpy as np

from dispersmooth.smoothing import sharpness_counterexample


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--alphas", default="0.0,0.4,0.5,0.75,1.0")
    parser.add_argument("--n-values", default="8,16,32,64,128,256")
    parser.add_argument("--s", type=float, default=0.0)
    parser.add_argument("--r", type=float, default=0.0)
    parser.add_argument("--b", type=float, default=0.55)
    parser.add_argument("--resolution", type=int, default=8)
    args = parser.parse_args()

    ns = [int(x) for x in args.n_values.split(",")]
    print(f"{'alpha':>6} | " + " | ".join(f"N={n:>4}" for n in ns) + " | slope (alpha - 1/2)")
    for alpha in (float(x) for x in args.alphas.split(",")):
        ratios = [
            sharpness_counterexample(
                n, args.s, args.r, alpha, args.b, resolution=args.resolution
            ).ratio
            for n in ns
        ]
        slope = np.polyfit(np.log(ns), np.log(ratios), 1)[0]
        cells = " | ".join(f"{r:6.4f}" for r in ratios)
        print(f"{alpha:6.2f} | {cells} | {slope:+.3f} ({alpha - 0.5:+.2f})")


if __name__ == "__main__":
    main()
