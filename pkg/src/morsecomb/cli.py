"""Command line entry point: certify, angles, schottky, selftest.

Exit codes: 0 certified/pass, 1 refuted/fail, 2 inconclusive, 3 input error.
"""

import argparse
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .config import parse_config
from .errors import ConfigError, GeometryError
from .estimates import angle_sweep
from .pingpong import certify_combination, flag_families, verify_freeness_ball
from .selftest import run_selftest

EXIT = {"certified": 0, "pass": 0, "refuted": 1, "fail": 1, "inconclusive": 2}
INPUT_ERROR = 3


def to_jsonable(obj):
    """Plain JSON types; non-finite floats become the strings 'inf', '-inf', 'nan'."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


@dataclass
class Report:
    command: str
    config: dict
    status: str
    certificate: dict = None
    freeness: dict = None
    angle_reports: list = field(default_factory=list)
    attempts: list = field(default_factory=list)
    selftest: dict = None
    timing: dict = None
    version: str = __version__

    def to_dict(self):
        out = {
            "artifact": {"name": "morsecomb", "version": self.version},
            "command": self.command,
            "status": self.status,
            "config": self.config,
            "certificate": self.certificate,
            "freeness": self.freeness,
            "angle_reports": self.angle_reports,
            "attempts": self.attempts,
            "selftest": self.selftest,
        }
        if self.timing is not None:
            out["timing"] = self.timing
        return to_jsonable(out)

    @classmethod
    def from_dict(cls, data):
        return cls(
            command=data["command"],
            config=data["config"],
            status=data["status"],
            certificate=data.get("certificate"),
            freeness=data.get("freeness"),
            angle_reports=data.get("angle_reports", []),
            attempts=data.get("attempts", []),
            selftest=data.get("selftest"),
            timing=data.get("timing"),
            version=data["artifact"]["version"],
        )

    def dumps(self):
        # repr-based float output is the shortest string that round-trips
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_atomic(path, text):
    """Write via a temporary file in the target directory, then rename over the target."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".report-", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class _Clock:
    def __init__(self):
        self.phases = {}

    def time(self, name, fn, *args, **kwargs):
        t0 = time.perf_counter()
        out = fn(*args, **kwargs)
        self.phases[name] = self.phases.get(name, 0.0) + 1000.0 * (time.perf_counter() - t0)
        return out


def _certify(cfg, clock, pair_budget):
    cert = clock.time(
        "certify",
        certify_combination,
        cfg.groups,
        cfg.x,
        cfg.theta,
        cfg.theta_prime,
        cfg.targets,
        cfg.max_syllables,
        pair_budget,
        tol=cfg.tol,
    )
    free = clock.time("freeness", verify_freeness_ball, cfg.groups, cfg.x, cfg.max_syllables, cfg.tol)
    freeness = {
        "free_up_to": free.free_up_to,
        "counterexample": None
        if free.counterexample is None
        else free.counterexample.to_dict(cfg.groups),
        "qi_constants": {"c": free.qi_constants[0], "a": free.qi_constants[1]},
        "pass": free.passed,
    }
    status = cert.verdict
    if status == "certified" and not free.passed:
        status = "inconclusive"
    return cert, freeness, status


def cmd_certify(cfg, args, clock):
    cert, freeness, status = _certify(cfg, clock, args.pairs or cfg.pair_budget)
    return Report("certify", cfg.to_dict(), status, cert.to_dict(), freeness)


def cmd_schottky(cfg, args, clock):
    """Power every factor by N (or by 1, 2, 4, ... up to --max-power) and certify."""
    powers = [args.power] if args.power else []
    if not powers:
        n = 1
        while n <= args.max_power:
            powers.append(n)
            n *= 2
    attempts = []
    report = None
    for n in powers:
        groups = [replace(g, power=g.power * n) for g in cfg.groups]
        run_cfg = replace(cfg, groups=groups)
        cert, freeness, status = _certify(run_cfg, clock, args.pairs or cfg.pair_budget)
        attempts.append({"power": n, "status": status})
        report = Report("schottky", run_cfg.to_dict(), status, cert.to_dict(), freeness)
        if status in ("certified", "refuted"):
            break
    report.attempts = attempts
    return report


def cmd_angles(cfg, args, clock):
    if len(cfg.groups) < 2:
        raise ConfigError("groups", "angle sweeps need two factors")
    fams = clock.time("flags", flag_families, cfg.groups[:2], cfg.x, cfg.pattern, cfg.tol)
    reports = clock.time(
        "angles",
        angle_sweep,
        fams[0],
        fams[1],
        cfg.x,
        cfg.theta,
        list(cfg.angles.radii),
        cfg.angles.samples,
        cfg.seed,
        cfg.angles.mode,
        cfg.tol,
    )
    status = "pass" if all(r.holds for r in reports) else "fail"
    return Report("angles", cfg.to_dict(), status, angle_reports=[r.to_dict() for r in reports])


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 3), not 'inconclusive'."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(INPUT_ERROR)


def build_parser():
    parser = _Parser(prog="morsecomb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("certify", "angles", "schottky", "selftest"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=name != "selftest", help="JSON config file")
        p.add_argument("--out", default="report.json", help="report path")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--pairs", type=int, default=None, help="pair budget for Morse checks")
        p.add_argument("--timing", action="store_true", help="record per-phase timings")
        if name == "schottky":
            p.add_argument("--power", type=int, default=None, help="power N (default: doubling)")
            p.add_argument("--max-power", type=int, default=32)
    return parser


def _summary(report):
    lines = [f"{report.command}: {report.status}"]
    if report.certificate:
        for key, cond in report.certificate["conditions"].items():
            lines.append(f"  {key:18s} {'pass' if cond['pass'] else 'FAIL'}")
        if report.certificate["counterexample"]:
            lines.append(f"  counterexample: {report.certificate['counterexample']['label']}")
    for att in report.attempts:
        lines.append(f"  power {att['power']}: {att['status']}")
    for rep in report.angle_reports:
        lines.append(f"  R={rep['R']:g} measured={rep['measured_max']:.6g} bound={rep['bound']}")
    if report.selftest:
        for name, res in report.selftest.items():
            lines.append(f"  {name:20s} {'pass' if res['pass'] else 'FAIL'}")
    return "\n".join(lines)


def main(argv=None):
    args = build_parser().parse_args(argv)
    clock = _Clock()
    try:
        if args.command == "selftest":
            seed = args.seed or 0
            results = run_selftest(seed)
            status = "pass" if all(r["pass"] for r in results.values()) else "fail"
            report = Report("selftest", {"seed": seed}, status, selftest=results)
        else:
            if args.pairs is not None and args.pairs < 1:
                raise ConfigError("--pairs", "must be positive")
            if getattr(args, "power", None) is not None and args.power < 1:
                raise ConfigError("--power", "must be positive")
            try:
                with open(args.config, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError("--config", str(exc)) from None
            cfg = parse_config(text)
            if args.seed is not None:
                cfg = replace(cfg, seed=args.seed)
            handler = {"certify": cmd_certify, "angles": cmd_angles, "schottky": cmd_schottky}
            report = handler[args.command](cfg, args, clock)
    except ConfigError as exc:
        print(f"input error at {exc.path or '<document>'}: {exc.message}", file=sys.stderr)
        return INPUT_ERROR
    except GeometryError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    if args.timing:
        report.timing = {k: round(v, 3) for k, v in sorted(clock.phases.items())}
    write_atomic(args.out, report.dumps())
    print(_summary(report))
    return EXIT[report.status]


if __name__ == "__main__":
    sys.exit(main())
