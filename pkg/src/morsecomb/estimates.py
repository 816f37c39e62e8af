"""Visual-angle estimates for antipodal flag families and their empirical checks.

Closed-form bounds
------------------
bound_f(D, R)      angle at z1 in the triangle (x, z1, z2) for z_i on the
                   xi-rays from x toward antipodal flags, d(x, z_i) >= R.
bound_R0(D, a)     distance beyond which z1 z2 is regular for an angular ball
                   of radius a about xi.
bound_f0(D, a, R)  xi-angle version of bound_f built from the nested balls
                   of radii a / 2^(n-1).
bound_R1(D, a)     threshold for the cone version with Theta-gap a.
separation_lower_bound(D, a, r)
                   lower bound on d(y1, y2) when d(x, y_i) >= r.
"""

from dataclasses import asdict, dataclass

import mpmath
import numpy as np

from .errors import InvalidGap, NotAntipodal
from .flags import _x_adapted, is_antipodal
from .linalg import unit_angle, vector_angle
from .parsets import d_opp
from .tolerances import DEFAULT_TOL
from .weyl import sample_theta_directions


def _check_gap(alpha):
    if not alpha > 0.0:
        raise InvalidGap(f"angular gap must be positive, got {alpha!r}")


def bound_f(D, R):
    if R < 2.0 * D + 1.0:
        return float(np.pi)
    return float(np.arcsin(2.0 * D / R))


def bound_R0(D, alpha):
    _check_gap(alpha)
    return 2.0 * D / np.sin(alpha)


def bound_R1(D, alpha):
    _check_gap(alpha)
    s = np.sin(alpha)
    return 2.0 * D * (1.0 + 1.0 / s + 1.0 / s**2)


def separation_lower_bound(D, alpha, r):
    _check_gap(alpha)
    s = np.sin(alpha)
    return max(0.0, r * s - 2.0 * D * (1.0 + s))


def bound_f0(D, alpha, R):
    """f(R) + alpha_n on [R0(alpha_n), R0(alpha_{n+1})), alpha_n = alpha / 2^(n-1); pi below R0(alpha)."""
    _check_gap(alpha)
    if D == 0.0:
        return bound_f(0.0, R)
    if R <= 0.0 or 2.0 * D / R > np.sin(alpha):
        return float(np.pi)
    needed = np.arcsin(2.0 * D / R)
    n = 1 + int(np.floor(np.log2(alpha / needed))) if needed > 0 else 1
    # guard against rounding at the bracket endpoints
    while n > 1 and 2.0 * D / np.sin(alpha / 2.0 ** (n - 1)) > R:
        n -= 1
    return float(min(np.pi, bound_f(D, R) + alpha / 2.0 ** (n - 1)))


def compute_D(L1, L2, x, tol=DEFAULT_TOL):
    """Largest distance from x to the parallel sets of cross pairs of the two families."""
    worst = 0.0
    for i, a in enumerate(L1.flags):
        for j, b in enumerate(L2.flags):
            if not is_antipodal(a, b, tol)[0]:
                raise NotAntipodal(0, 1, (i, j))
            worst = max(worst, d_opp(x, a, b, tol))
    return float(worst)


@dataclass
class AngleBoundReport:
    """Empirical angle maxima at one radius.

    measured_max is the largest xi-angle; riemannian_max the largest
    Riemannian angle (ray mode only).  bound is the proved xi-angle bound
    (f0 in ray mode, None in cone mode where no closed form exists) and
    riemannian_bound the proved bound f for Riemannian angles.
    """

    R: float
    bound: float
    measured_max: float
    samples: int
    mode: str = "cone"
    D: float = 0.0
    riemannian_max: float = None
    riemannian_bound: float = None
    irregular: int = 0

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)

    @property
    def holds(self):
        ok = True
        if self.bound is not None:
            ok &= self.measured_max <= self.bound + DEFAULT_TOL.stat
        if self.riemannian_bound is not None:
            ok &= self.riemannian_max <= self.riemannian_bound + DEFAULT_TOL.stat
        return bool(ok)


def _sample_radius(rng, R):
    return R * float(np.exp(rng.exponential(0.5)))


def graded_relative(v1, c, v2):
    """Position of z2 seen from z1 for z_i = h_i exp(v_i) h_i^T with h_1^{-1} h_2 = c orthogonal.

    Translating z1 to the identity sends z2 to N N^T with
    N = exp(-v1/2) c exp(v2/2).  At distances of tens of units the entries
    of N span many orders of magnitude, so the SVD runs in mpmath with a
    precision scaled to that spread.  Returns (logs, u): the descending
    Delta-vector of (z1, z2) and the matching eigenvectors of N N^T.
    """
    spread = (np.max(np.abs(v1)) + np.max(np.abs(v2))) / np.log(10.0)
    with mpmath.workdps(int(30 + spread)):
        d = len(v1)
        n = mpmath.matrix(d, d)
        for i in range(d):
            for j in range(d):
                n[i, j] = mpmath.exp(-mpmath.mpf(v1[i]) / 2) * mpmath.mpf(c[i, j]) * mpmath.exp(
                    mpmath.mpf(v2[j]) / 2
                )
        u, sv, _ = mpmath.svd_r(n)
        logs = np.array([float(2 * mpmath.log(sv[k])) for k in range(d)])
        u = np.array(u.tolist(), dtype=float)
    order = np.argsort(-logs)
    return logs[order], u[:, order]


def _hinge_angles(v1, c, v2, th, tol):
    """(Riemannian angle, xi-angle or None) at z1 between x and z2, with x at the tip.

    In the translated frame z1 = I, x = exp(-v1) is diagonal, so its
    direction is diag(-v1) and its flag is the reversed standard flag,
    whose xi-direction is diag(-xi).
    """
    logs, u = graded_relative(v1, c, v2)
    riem = vector_angle(np.diag(-np.asarray(v1)), (u * logs) @ u.T)
    gaps = [logs[k - 1] - logs[k] for k in th.pattern.dims]
    if min(gaps) <= tol.gap:
        return riem, None
    return riem, unit_angle(np.diag(-th.xi), (u * th.xi) @ u.T)


def measure_max_xi_angle(L1, L2, x, th, R, samples, seed, mode="cone", D=None, tol=DEFAULT_TOL):
    """Sample y_i in the cones (or on the xi-rays) at distance >= R and record angle maxima.

    Each sample picks a cross pair of flags, two radii >= R and (in cone
    mode) two Theta-directions, then measures the angles at both far points.
    """
    if mode not in ("cone", "ray"):
        raise ValueError(f"unknown mode {mode!r}")
    if D is None:
        D = compute_D(L1, L2, x, tol)
    rng = np.random.default_rng(seed)
    frames1 = [_x_adapted(x, f) for f in L1.flags]
    frames2 = [_x_adapted(x, f) for f in L2.flags]
    xi_max = 0.0
    riem_max = 0.0
    irregular = 0
    for _ in range(samples):
        u1 = frames1[rng.integers(len(frames1))]
        u2 = frames2[rng.integers(len(frames2))]
        r1, r2 = _sample_radius(rng, R), _sample_radius(rng, R)
        if mode == "ray":
            v1, v2 = r1 * th.xi, r2 * th.xi
        else:
            dirs = sample_theta_directions(rng, th, 2)
            v1, v2 = r1 * dirs[0], r2 * dirs[1]
        c = u1.T @ u2
        for a, b, m in ((v1, v2, c), (v2, v1, c.T)):
            riem, ang = _hinge_angles(a, m, b, th, tol)
            riem_max = max(riem_max, riem)
            if ang is None:
                irregular += 1
                ang = np.pi
            xi_max = max(xi_max, ang)
    if mode == "ray":
        return AngleBoundReport(
            R=float(R),
            bound=bound_f0(D, th.beta, R),
            measured_max=float(xi_max),
            samples=samples,
            mode=mode,
            D=float(D),
            riemannian_max=float(riem_max),
            riemannian_bound=bound_f(D, R),
            irregular=irregular,
        )
    return AngleBoundReport(
        R=float(R), bound=None, measured_max=float(xi_max), samples=samples, mode=mode,
        D=float(D), irregular=irregular,
    )


def angle_sweep(L1, L2, x, th, radii, samples, seed, mode="cone", tol=DEFAULT_TOL):
    D = compute_D(L1, L2, x, tol)
    return [
        measure_max_xi_angle(L1, L2, x, th, R, samples, seed + i, mode, D, tol)
        for i, R in enumerate(radii)
    ]
