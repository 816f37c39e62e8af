"""Maximal visual angles against radius for the flag families of a config.

Prints, per radius, the sampled xi-angle maximum and (in ray mode) the
Riemannian maximum next to the proved bounds.
"""

import argparse
import json
from importlib import resources

from morsecomb.config import parse_config
from morsecomb.estimates import angle_sweep, bound_R1, compute_D
from morsecomb.pingpong import flag_families


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(resources.files("morsecomb") / "fixtures" / "schottky.json"))
    ap.add_argument("--radii", type=float, nargs="+", default=[5, 10, 20, 40, 80, 160])
    ap.add_argument("--samples", type=int, default=300)
    ap.add_argument("--mode", choices=["ray", "cone"], default="cone")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="optional JSON output")
    args = ap.parse_args()

    cfg = parse_config(open(args.config).read())
    l1, l2 = flag_families(cfg.groups[:2], cfg.x, cfg.pattern)
    D = compute_D(l1, l2, cfg.x)
    print(f"D = {D:.4f}, R1 = {bound_R1(D, cfg.beta_prime - cfg.beta):.2f}")
    reports = angle_sweep(l1, l2, cfg.x, cfg.theta, args.radii, args.samples, args.seed, args.mode)
    print(f"{'R':>8} {'xi max':>12} {'xi bound':>10} {'riem max':>12} {'riem bound':>10}")
    for r in reports:
        fmt = lambda v: "-" if v is None else f"{v:.4g}"  # noqa: E731
        print(f"{r.R:8g} {r.measured_max:12.4e} {fmt(r.bound):>10} {fmt(r.riemannian_max):>12} {fmt(r.riemannian_bound):>10}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump([r.to_dict() for r in reports], fh, indent=2)


if __name__ == "__main__":
    main()
