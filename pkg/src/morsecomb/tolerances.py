from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    sym: float = 1e-9
    det: float = 1e-9
    sum: float = 1e-9
    degenerate: float = 1e-10
    gap: float = 1e-6
    antipodal: float = 1e-6
    flag: float = 1e-6
    proj: float = 1e-7
    proj_maxiter: int = 500
    diamond: float = 1e-6
    id: float = 1e-8
    stat: float = 1e-6
    c_thick: float = 0.25

    def updated(self, **overrides):
        known = {f.name for f in fields(self)}
        bad = set(overrides) - known
        if bad:
            raise KeyError(f"unknown tolerance(s): {sorted(bad)}")
        return replace(self, **overrides)

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT_TOL = Tolerances()
