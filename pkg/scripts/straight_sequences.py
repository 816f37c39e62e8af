"""Distance from straight-spaced sequences to the parallel set of their end flags.

Sequences are spaced along a regular geodesic of a flat and pushed off it
by delta with alternating sign; delta controls the straightness eps and the
spacing controls l.
"""

import argparse

from morsecomb.morse import check_straight_spaced, parallel_set_proximity, perturbed_flat_sequence
from morsecomb.weyl import FacePattern, ThetaSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--deltas", type=float, nargs="+", default=[0.8, 0.4, 0.2, 0.1, 0.05])
    ap.add_argument("--spacings", type=float, nargs="+", default=[4.0, 8.0, 16.0, 32.0])
    ap.add_argument("--points", type=int, default=8)
    ap.add_argument("--beta", type=float, default=0.2)
    args = ap.parse_args()
    th = ThetaSpec(args.beta, FacePattern.full(3))
    print(f"{'delta':>6} {'spacing':>8} {'eps':>8} {'l':>8} {'regular':>8} {'proximity':>10}")
    for delta in args.deltas:
        for s in args.spacings:
            seq = perturbed_flat_sequence(args.points, s, delta)
            eps, ell, regular = check_straight_spaced(seq, th)
            prox = parallel_set_proximity(seq, th)
            print(f"{delta:6.3f} {s:8.1f} {eps:8.4f} {ell:8.3f} {str(regular):>8} {prox:10.4f}")


if __name__ == "__main__":
    main()
