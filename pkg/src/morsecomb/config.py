"""Run configuration: JSON parsing, validation and emission."""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, GeometryError
from .pingpong import GroupSpec, Targets
from .tolerances import DEFAULT_TOL, Tolerances
from .weyl import FacePattern, ThetaSpec, eps_star


@dataclass
class AngleSettings:
    radii: tuple = (10.0, 20.0, 40.0, 80.0)
    samples: int = 200
    mode: str = "ray"

    def to_dict(self):
        return {"radii": list(self.radii), "samples": self.samples, "mode": self.mode}


@dataclass
class Config:
    d: int
    pattern: FacePattern
    beta: float
    beta_prime: float
    groups: list
    base_point: np.ndarray = None
    targets: Targets = field(default_factory=Targets)
    max_syllables: int = 6
    seed: int = 0
    pair_budget: int = 2000
    angles: AngleSettings = field(default_factory=AngleSettings)
    tolerances: dict = field(default_factory=dict)

    @property
    def theta(self):
        return ThetaSpec(self.beta, self.pattern)

    @property
    def theta_prime(self):
        return ThetaSpec(self.beta_prime, self.pattern)

    @property
    def tol(self):
        return DEFAULT_TOL.updated(**self.tolerances) if self.tolerances else DEFAULT_TOL

    @property
    def x(self):
        return np.eye(self.d) if self.base_point is None else self.base_point

    def to_dict(self):
        return {
            "d": self.d,
            "pattern": list(self.pattern.dims),
            "theta": {"beta": self.beta, "beta_prime": self.beta_prime},
            "groups": [g.to_dict() for g in self.groups],
            "base_point": None if self.base_point is None else self.base_point.tolist(),
            "targets": self.targets.to_dict(),
            "max_syllables": self.max_syllables,
            "seed": self.seed,
            "pair_budget": self.pair_budget,
            "angles": self.angles.to_dict(),
            "tolerances": dict(sorted(self.tolerances.items())),
        }

    def __eq__(self, other):
        return isinstance(other, Config) and self.to_dict() == other.to_dict()


def emit_config(config):
    return json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n"


# -- validation helpers --------------------------------------------------------


def _get(obj, key, path, default=None, required=False):
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    if key not in obj or obj[key] is None:
        if required:
            raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
        return default
    return obj[key]


def _int(value, path, lo=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(path, f"must be at least {lo}")
    return value


def _real(value, path, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    if positive and value <= 0:
        raise ConfigError(path, "must be positive")
    return value


def _matrix(value, d, path):
    try:
        m = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(path, "expected a row-major numeric matrix") from None
    if m.shape != (d, d):
        raise ConfigError(path, f"expected a {d}x{d} matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ConfigError(path, "matrix entries must be finite")
    return m


def _group(data, d, path, tol):
    name = _get(data, "name", path, required=True)
    if not isinstance(name, str) or not name:
        raise ConfigError(f"{path}.name", "expected a nonempty string")
    gens = _get(data, "generators", path, required=True)
    if not isinstance(gens, list) or not gens:
        raise ConfigError(f"{path}.generators", "expected a nonempty list of matrices")
    mats = []
    for i, g in enumerate(gens):
        m = _matrix(g, d, f"{path}.generators[{i}]")
        det = np.linalg.det(m)
        if abs(det - 1.0) > tol.det:
            raise ConfigError(f"{path}.generators[{i}]", f"determinant {det!r} is not 1")
        mats.append(m)
    radius = _int(_get(data, "ball_radius", path, 1), f"{path}.ball_radius", 1)
    power = _int(_get(data, "power", path, 1), f"{path}.power", 1)
    unknown = set(data) - {"name", "generators", "ball_radius", "power"}
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}", "unknown field")
    return GroupSpec(name, tuple(mats), radius, power)


_TOP_KEYS = {
    "d",
    "pattern",
    "theta",
    "groups",
    "base_point",
    "targets",
    "max_syllables",
    "seed",
    "pair_budget",
    "angles",
    "tolerances",
}


def config_from_dict(data):
    if not isinstance(data, dict):
        raise ConfigError("", "top level must be an object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown field")

    overrides = _get(data, "tolerances", "", {})
    if not isinstance(overrides, dict):
        raise ConfigError("tolerances", "expected an object")
    for key, value in overrides.items():
        if key not in Tolerances.__dataclass_fields__:
            raise ConfigError(f"tolerances.{key}", "unknown tolerance")
        _real(value, f"tolerances.{key}", positive=True)
    tol = DEFAULT_TOL.updated(**overrides) if overrides else DEFAULT_TOL

    d = _int(_get(data, "d", "", required=True), "d", 2)
    dims = _get(data, "pattern", "", None)
    try:
        pattern = FacePattern.full(d) if dims is None else FacePattern(d, tuple(dims))
    except (TypeError, ValueError) as exc:
        raise ConfigError("pattern", str(exc)) from None

    theta = _get(data, "theta", "", required=True)
    beta = _real(_get(theta, "beta", "theta", required=True), "theta.beta", positive=True)
    beta_p = _real(
        _get(theta, "beta_prime", "theta", required=True), "theta.beta_prime", positive=True
    )
    if not beta < beta_p:
        raise ConfigError("theta.beta_prime", "must exceed theta.beta")
    if not beta_p < eps_star(pattern):
        raise ConfigError(
            "theta.beta_prime", f"must stay below the wall angle {eps_star(pattern)!r}"
        )

    groups_data = _get(data, "groups", "", required=True)
    if not isinstance(groups_data, list) or not groups_data:
        raise ConfigError("groups", "expected a nonempty list")
    groups = [_group(g, d, f"groups[{i}]", tol) for i, g in enumerate(groups_data)]
    names = [g.name for g in groups]
    for i, n in enumerate(names):
        if n in names[:i]:
            raise ConfigError(f"groups[{i}].name", f"duplicate name {n!r}")

    base = _get(data, "base_point", "", None)
    if base is not None:
        base = _matrix(base, d, "base_point")
        if not np.allclose(base, base.T, atol=tol.sym) or np.linalg.eigvalsh(base)[0] <= 0:
            raise ConfigError("base_point", "must be symmetric positive definite")
        if abs(np.linalg.det(base) - 1.0) > tol.det:
            raise ConfigError("base_point", "determinant must be 1")

    tdata = _get(data, "targets", "", {})
    targets = Targets(
        eps_max=_real(_get(tdata, "eps_max", "targets", math.pi / 6), "targets.eps_max", True),
        l_min=_real(_get(tdata, "l_min", "targets", 0.0), "targets.l_min"),
        D_max=None
        if _get(tdata, "D_max", "targets", None) is None
        else _real(tdata["D_max"], "targets.D_max", True),
    )
    adata = _get(data, "angles", "", {})
    radii = _get(adata, "radii", "angles", [10.0, 20.0, 40.0, 80.0])
    if not isinstance(radii, list) or not radii:
        raise ConfigError("angles.radii", "expected a nonempty list")
    mode = _get(adata, "mode", "angles", "ray")
    if mode not in ("ray", "cone"):
        raise ConfigError("angles.mode", "expected 'ray' or 'cone'")
    angles = AngleSettings(
        radii=tuple(_real(r, f"angles.radii[{i}]", True) for i, r in enumerate(radii)),
        samples=_int(_get(adata, "samples", "angles", 200), "angles.samples", 1),
        mode=mode,
    )
    return Config(
        d=d,
        pattern=pattern,
        beta=beta,
        beta_prime=beta_p,
        groups=groups,
        base_point=base,
        targets=targets,
        max_syllables=_int(_get(data, "max_syllables", "", 6), "max_syllables", 1),
        seed=_int(_get(data, "seed", "", 0), "seed"),
        pair_budget=_int(_get(data, "pair_budget", "", 2000), "pair_budget", 1),
        angles=angles,
        tolerances={k: type(getattr(DEFAULT_TOL, k))(v) for k, v in overrides.items()},
    )


def parse_config(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"not valid JSON: {exc}") from None
    try:
        return config_from_dict(data)
    except GeometryError as exc:
        raise ConfigError("", str(exc)) from None
