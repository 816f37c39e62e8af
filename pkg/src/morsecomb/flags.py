"""Partial flags: flags of segments, transversality margins, xi-angles, thickening.

A flag of pattern (d_1 < ... < d_m) is stored as an orthonormal d x d basis
whose first d_j columns span the j-th subspace.  Only the spans of the
leading column groups carry meaning.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import expm, subspace_angles

from .errors import DegenerateSegment, NotAntipodal, NotRegular, PatternMismatch
from .graded import relative
from .linalg import orthonormalize, spd_invsqrt, spd_sqrt, sym_eigh, symmetrize, unit_angle
from .tolerances import DEFAULT_TOL
from .weyl import FacePattern


@dataclass(frozen=True, eq=False)
class Flag:
    pattern: FacePattern
    basis: np.ndarray

    def __post_init__(self):
        b = np.array(self.basis, dtype=float)
        if b.shape != (self.pattern.d, self.pattern.d):
            raise ValueError(f"flag basis must be {self.pattern.d}x{self.pattern.d}")
        object.__setattr__(self, "basis", b)

    def subspace(self, k):
        return self.basis[:, :k]

    def to_dict(self):
        return {"pattern": list(self.pattern.dims), "basis": self.basis.tolist()}

    @classmethod
    def from_dict(cls, data):
        basis = np.asarray(data["basis"], dtype=float)
        return cls(FacePattern(basis.shape[0], tuple(data["pattern"])), orthonormalize(basis))

    @classmethod
    def standard(cls, pattern):
        return cls(pattern, np.eye(pattern.d))

    @classmethod
    def opposite_standard(cls, pattern):
        return cls(pattern, np.eye(pattern.d)[:, ::-1])


@dataclass(frozen=True)
class FlagFamily:
    """Finite sample of a limit set, with its transversality margin and thickening radius."""

    flags: tuple
    margin: float = 0.0
    delta_flag: float = field(default=0.0)

    def __post_init__(self):
        object.__setattr__(self, "flags", tuple(self.flags))

    def __len__(self):
        return len(self.flags)


def transform_flag(g, flag):
    """Image of a flag under a group element (acting linearly on R^d)."""
    return Flag(flag.pattern, orthonormalize(np.asarray(g, dtype=float) @ flag.basis))


def segment_frame(x, y):
    """Eigen-decomposition of x^{-1/2} y x^{-1/2}: (log-eigenvalues, eigenvectors), descending."""
    si = spd_invsqrt(x)
    w, u = sym_eigh(symmetrize(si @ y @ si))
    return np.log(w[::-1]), u[:, ::-1]


def flag_of_segment(x, y, pattern, tol=DEFAULT_TOL):
    logs, u = segment_frame(x, y)
    if np.linalg.norm(logs) <= tol.degenerate:
        raise DegenerateSegment("flag of a degenerate segment")
    for k in pattern.dims:
        if logs[k - 1] - logs[k] <= tol.gap:
            raise NotRegular(k)
    return Flag(pattern, orthonormalize(spd_sqrt(x) @ u))


def graded_flag_of_segment(p, q, pattern, tol=DEFAULT_TOL):
    """flag_of_segment for GradedPoints, usable when p and q are far apart.

    The basis K exp(a/2) U has rows graded by exp(a/2); Householder QR on
    rows sorted by decreasing scale recovers the column spans accurately.
    """
    logs, u = relative(p, q)
    if np.linalg.norm(logs) <= tol.degenerate:
        raise DegenerateSegment("flag of a degenerate segment")
    for k in pattern.dims:
        if logs[k - 1] - logs[k] <= tol.gap:
            raise NotRegular(k)
    order = np.argsort(-p.logs)
    half = 0.5 * (p.logs[order] - p.logs.max())
    qm, r = np.linalg.qr(np.exp(half)[:, None] * u[order])
    qm = qm * np.where(np.diag(r) < 0, -1.0, 1.0)
    back = np.empty_like(qm)
    back[order] = qm
    return Flag(pattern, p.frame @ back)


def transversality_margin(a, b):
    if a.pattern != b.pattern:
        raise PatternMismatch(f"patterns {a.pattern.dims} and {b.pattern.dims} differ")
    d = a.pattern.d
    margins = [
        np.linalg.svd(np.hstack([a.subspace(k), b.subspace(d - k)]), compute_uv=False)[-1]
        for k in a.pattern.dims
    ]
    return float(min(margins))


def is_antipodal(a, b, tol=DEFAULT_TOL):
    margin = transversality_margin(a, b)
    return margin > tol.antipodal, margin


def flag_distance(a, b):
    """Largest sine of a principal angle between corresponding subspaces."""
    if a.pattern != b.pattern:
        raise PatternMismatch(f"patterns {a.pattern.dims} and {b.pattern.dims} differ")
    worst = 0.0
    for k in a.pattern.dims:
        ang = subspace_angles(a.subspace(k), b.subspace(k))
        worst = max(worst, float(np.sin(np.max(ang))))
    return worst


def flags_equal(a, b, tol=DEFAULT_TOL):
    return flag_distance(a, b) <= tol.flag


def _x_adapted(x, flag):
    """Basis of x^{-1/2}.flag, orthonormal: the flag seen from x in normalized coordinates."""
    return orthonormalize(spd_invsqrt(x) @ flag.basis)


def xi_direction(x, flag, xi):
    """Unit tangent at x (normalized coordinates) pointing to the xi-point of the flag."""
    u = _x_adapted(x, flag)
    return symmetrize((u * xi) @ u.T)


def xi_angle(x, a, b, xi):
    ha = xi_direction(x, a, xi)
    hb = xi_direction(x, b, xi)
    # summing the two orders makes the result exactly symmetric in (a, b)
    return 0.5 * (unit_angle(ha, hb) + unit_angle(hb, ha))


def xi_angle_points(x, y1, y2, th, tol=DEFAULT_TOL):
    a = flag_of_segment(x, y1, th.pattern, tol)
    b = flag_of_segment(x, y2, th.pattern, tol)
    return xi_angle(x, a, b, th.xi)


def cartan_flag(x, flag):
    """Image of a flag under the point reflection at x."""
    u = _x_adapted(x, flag)
    return Flag(flag.pattern, orthonormalize(spd_sqrt(x) @ u[:, ::-1]))


def cone_point(x, flag, v):
    """Point x^{1/2} U exp(diag v) U^T x^{1/2}; v is the (descending) Delta-vector from x."""
    u = _x_adapted(x, flag)
    s = spd_sqrt(x)
    h = s @ u
    return symmetrize((h * np.exp(np.asarray(v, dtype=float))) @ h.T)


def ray_point(x, flag, direction, t):
    return cone_point(x, flag, t * np.asarray(direction, dtype=float))


def perturb_flag(flag, radius, rng):
    """Random flag within ``radius`` of ``flag`` in flag_distance.

    Rotates the basis by exp(K) for a random skew K of spectral norm at
    most radius; every subspace moves by at most ||exp(K) - I|| <= radius.
    """
    d = flag.pattern.d
    a = rng.standard_normal((d, d))
    k = a - a.T
    k *= radius * rng.random() / np.linalg.norm(k, 2)
    return Flag(flag.pattern, expm(k) @ flag.basis)


def thicken_flag_family(families, tol=DEFAULT_TOL):
    """Common radius delta_flag keeping cross pairs of different families antipodal.

    Returns (families', delta_flag) with delta_flag = c_thick times the least
    cross-family margin.  The margin equals sqrt(1 - cos theta) for the
    smallest principal angle theta between complementary subspaces, so it is
    (1/sqrt2)-Lipschitz in theta; moving both flags by flag_distance <= delta
    changes theta by at most 2 arcsin(delta), which keeps c_thick = 1/4 safe.
    """
    families = list(families)
    least = np.inf
    per_family = [np.inf] * len(families)
    for i in range(len(families)):
        for j in range(i + 1, len(families)):
            for a_idx, a in enumerate(families[i].flags):
                for b_idx, b in enumerate(families[j].flags):
                    ok, margin = is_antipodal(a, b, tol)
                    if not ok:
                        raise NotAntipodal(i, j, (a_idx, b_idx))
                    least = min(least, margin)
                    per_family[i] = min(per_family[i], margin)
                    per_family[j] = min(per_family[j], margin)
    if not np.isfinite(least):
        least = 0.0
    delta = tol.c_thick * least
    out = [
        replace(fam, margin=float(m) if np.isfinite(m) else 0.0, delta_flag=delta)
        for fam, m in zip(families, per_family)
    ]
    return out, delta
