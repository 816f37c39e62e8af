"""Regenerate the bundled example configs in src/morsecomb/fixtures/."""

import argparse
import json
import pathlib

from morsecomb.samples import hyperbolic_pair, schottky_elements

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "src" / "morsecomb" / "fixtures"


def schottky_config(seed=2, power=8):
    a, b = schottky_elements(seed)
    return {
        "d": 3,
        "theta": {"beta": 0.2, "beta_prime": 0.45},
        "groups": [
            {"name": "A", "generators": [a.tolist()], "power": power},
            {"name": "B", "generators": [b.tolist()], "power": power},
        ],
        "max_syllables": 6,
        "seed": seed,
    }


def duplicated_config(seed=2, power=8):
    cfg = schottky_config(seed, power)
    gen = cfg["groups"][0]["generators"]
    cfg["groups"] = [
        {"name": "A", "generators": gen, "power": power},
        {"name": "B", "generators": gen, "power": power},
    ]
    return cfg


def klein_config():
    a, b = hyperbolic_pair()
    return {
        "d": 2,
        "theta": {"beta": 0.2, "beta_prime": 0.45},
        "groups": [
            {"name": "A", "generators": [a.tolist()]},
            {"name": "B", "generators": [b.tolist()]},
        ],
        "max_syllables": 6,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=pathlib.Path, default=FIXTURES)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, cfg in (
        ("schottky.json", schottky_config()),
        ("duplicated.json", duplicated_config()),
        ("klein.json", klein_config()),
    ):
        (args.out / name).write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n")
        print(args.out / name)


if __name__ == "__main__":
    main()
