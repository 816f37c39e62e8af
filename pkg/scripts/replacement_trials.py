"""Randomized quasigeodesic replacements in a flat, and the Euclidean counterexample.

Each trial replaces a random segment of a Theta-regular axis by a bump
patch pushed slightly off the flat, then runs the Morse check on the
result.  The second table shows the best multiplicative constant of the
staple-shaped replacement growing with its size.
"""

import argparse

import numpy as np

from morsecomb.morse import (
    check_morse,
    euclidean_counterexample,
    fitted_constants,
    random_replacement_trial,
    replace_segment,
)
from morsecomb.weyl import FacePattern, ThetaSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=8)
    ap.add_argument("--beta", type=float, default=0.45)
    ap.add_argument("--D", type=float, default=1.0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    th = ThetaSpec(args.beta, FacePattern.full(3))
    measured, failed = [], 0
    for _ in range(args.trials):
        path, t1, t2, patch = random_replacement_trial(rng)
        v = check_morse(replace_segment(path, t1, t2, patch), 2.0, 1.0, th, args.D)
        failed += not v.pass_
        measured.append(v.D_measured)
    q = np.quantile(measured, [0.5, 0.9, 1.0])
    print(f"{args.trials} trials, {failed} failed; D'' median {q[0]:.4f}, 90% {q[1]:.4f}, max {q[2]:.4f}")
    print(f"{'r':>6} {'L':>8}")
    for r in (1.0, 2.0, 4.0, 8.0, 16.0):
        path, patch = euclidean_counterexample(r)
        L, _ = fitted_constants(replace_segment(path, -r, r, patch), 1.0)
        print(f"{r:6g} {L:8.3f}")


if __name__ == "__main__":
    main()
