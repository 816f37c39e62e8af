"""Smallest certifying power N for random pairs of proximal elements in SL(3, R).

For each seed the generators are powered by N = 1, 2, 4, ... until the
combination is certified or refuted, exactly as the ``schottky`` command does.
"""

import argparse
import time
from dataclasses import replace

import numpy as np

from morsecomb.pingpong import GroupSpec, certify_combination, verify_freeness_ball
from morsecomb.samples import schottky_elements
from morsecomb.weyl import FacePattern, ThetaSpec


def smallest_power(seed, max_power, max_syllables, beta, beta_prime):
    pattern = FacePattern.full(3)
    th, th_prime = ThetaSpec(beta, pattern), ThetaSpec(beta_prime, pattern)
    base = [GroupSpec(name, (g,)) for name, g in zip("AB", schottky_elements(seed))]
    n = 1
    while n <= max_power:
        groups = [replace(g, power=n) for g in base]
        cert = certify_combination(groups, np.eye(3), th, th_prime, max_syllables=max_syllables)
        if cert.verdict != "inconclusive":
            free = verify_freeness_ball(groups, np.eye(3), max_syllables)
            return n, cert, free
        n *= 2
    return None, cert, None


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=8)
    ap.add_argument("--max-power", type=int, default=32)
    ap.add_argument("--syllables", type=int, default=6)
    ap.add_argument("--beta", type=float, default=0.2)
    ap.add_argument("--beta-prime", type=float, default=0.45)
    args = ap.parse_args()
    print(f"{'seed':>4} {'N':>4} {'verdict':>12} {'S/2R1':>8} {'eps':>8} {'c':>8} {'sec':>6}")
    for seed in range(args.seeds):
        t0 = time.perf_counter()
        n, cert, free = smallest_power(seed, args.max_power, args.syllables, args.beta, args.beta_prime)
        cond = cert.conditions
        ratio = cond["norm_bound"].get("S_over_2R1")
        eps = cond["straightness"].get("eps_measured")
        c = free.qi_constants[0] if free else float("nan")
        print(
            f"{seed:4d} {n or '-':>4} {cert.verdict:>12} "
            f"{ratio if ratio is None else f'{ratio:.3f}':>8} {eps if eps is None else f'{eps:.3f}':>8} "
            f"{c:8.3f} {time.perf_counter() - t0:6.1f}"
        )


if __name__ == "__main__":
    main()
