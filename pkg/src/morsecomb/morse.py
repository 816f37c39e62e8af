"""Straight-spaced sequences, Morse quasigeodesic checks and path replacement.

Paths are finite knot samples.  Quasi-isometry inequalities, Theta-regularity
and diamond closeness are all checked at knots; geodesic subdivision makes
the checks finer when asked for.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSegment, EndpointMismatch, RangeError
from .flags import graded_flag_of_segment
from .graded import GradedPoint, as_graded, distance, from_normalized, geodesic_point, relative
from .linalg import unit_angle
from .parsets import (
    diamond_distances_batch,
    graded_distances_to_flat,
    parallel_set_of,
    project_many,
)
from .tolerances import DEFAULT_TOL
from .weyl import FacePattern, angle_to_xi, default_xi


@dataclass(frozen=True, eq=False)
class PathSample:
    ts: np.ndarray
    points: tuple

    def __post_init__(self):
        ts = np.asarray(self.ts, dtype=float)
        pts = tuple(as_graded(p) for p in self.points)
        if len(ts) < 2 or len(ts) != len(pts):
            raise ValueError("a path needs at least two knots with one time each")
        if not np.all(np.isfinite(ts)) or np.any(np.diff(ts) <= 0):
            raise ValueError("knot times must be finite and strictly increasing")
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_knots(cls, knots):
        return cls([t for t, _ in knots], [p for _, p in knots])

    @property
    def knots(self):
        return list(zip(self.ts.tolist(), self.points))

    def __len__(self):
        return len(self.ts)

    def point_at(self, t):
        """Point at time t on the piecewise geodesic through the knots."""
        if t < self.ts[0] - 1e-12 or t > self.ts[-1] + 1e-12:
            raise RangeError(f"time {t!r} outside [{self.ts[0]!r}, {self.ts[-1]!r}]")
        k = int(np.searchsorted(self.ts, t, side="right")) - 1
        k = min(max(k, 0), len(self.ts) - 2)
        frac = (t - self.ts[k]) / (self.ts[k + 1] - self.ts[k])
        if frac <= 0.0:
            return self.points[k]
        if frac >= 1.0:
            return self.points[k + 1]
        return geodesic_point(self.points[k], self.points[k + 1], frac)

    def restrict(self, t1, t2):
        keep = (self.ts >= t1 - 1e-12) & (self.ts <= t2 + 1e-12)
        return PathSample(self.ts[keep], [p for p, k in zip(self.points, keep) if k])

    def subdivided(self, depth):
        """Insert ``depth`` evenly spaced geodesic points into every knot interval."""
        if depth <= 0:
            return self
        ts, pts = [], []
        for k in range(len(self.ts) - 1):
            a, b = self.points[k], self.points[k + 1]
            for i in range(depth + 1):
                frac = i / (depth + 1)
                ts.append(self.ts[k] + frac * (self.ts[k + 1] - self.ts[k]))
                pts.append(a if i == 0 else geodesic_point(a, b, frac))
        ts.append(self.ts[-1])
        pts.append(self.points[-1])
        return PathSample(ts, pts)

    def matrices(self):
        return [p.matrix() for p in self.points]


@dataclass(frozen=True)
class StraightSpacing:
    eps: float
    l: float
    regular: bool
    hinge_angles: tuple = ()

    def __iter__(self):
        return iter((self.eps, self.l, self.regular))


def _xi_dir(u, xi):
    return (u * xi) @ u.T


def _flag_ok(logs, pattern, tol):
    return all(logs[k - 1] - logs[k] > tol.gap for k in pattern.dims)


def hinge_xi_angle(prev, at, nxt, th, tol=DEFAULT_TOL):
    """xi-angle at ``at`` between prev and nxt; 0 when either flag is undefined."""
    la, ua = relative(at, prev)
    lb, ub = relative(at, nxt)
    if not (_flag_ok(la, th.pattern, tol) and _flag_ok(lb, th.pattern, tol)):
        return 0.0
    return float(unit_angle(_xi_dir(ua, th.xi), _xi_dir(ub, th.xi)))


def check_straight_spaced(seq, th, tol=DEFAULT_TOL):
    """(eps, l, regular) of a sequence: eps = pi - least hinge xi-angle, l = least spacing."""
    seq = [as_graded(p) for p in seq]
    if len(seq) < 3:
        raise ValueError("straightness needs at least three points")
    regular = True
    spacing = np.inf
    for a, b in zip(seq, seq[1:]):
        logs, _ = relative(a, b)
        n = np.linalg.norm(logs)
        if n <= tol.degenerate:
            raise DegenerateSegment("repeated consecutive points")
        spacing = min(spacing, n)
        regular &= angle_to_xi(logs, th) <= th.beta
    hinges = tuple(hinge_xi_angle(seq[k - 1], seq[k], seq[k + 1], th, tol) for k in range(1, len(seq) - 1))
    return StraightSpacing(float(np.pi - min(hinges)), float(spacing), bool(regular), hinges)


@dataclass
class MorseVerdict:
    L_fit: float
    A_fit: float
    theta_fit: float
    D_measured: float
    pass_: bool
    pairs_checked: int = 0
    failures: list = field(default_factory=list)

    def to_dict(self):
        return {
            "L_fit": self.L_fit,
            "A_fit": self.A_fit,
            "theta_fit": self.theta_fit,
            "D_measured": self.D_measured,
            "pass": self.pass_,
            "pairs_checked": self.pairs_checked,
            "failures": list(self.failures),
        }


def select_pairs(n, budget):
    """Knot pairs (i < j) in lexicographic order, stride-sampled down to the budget."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if budget is None or len(pairs) <= budget:
        return pairs
    stride = int(np.ceil(len(pairs) / budget))
    chosen = pairs[::stride]
    if pairs[-1] not in chosen:
        chosen.append(pairs[-1])
    return chosen


def fit_L(dts, ds, A):
    """Least L with dt/L - A <= d <= L dt + A on all samples (at least 1)."""
    dts = np.asarray(dts, dtype=float)
    ds = np.asarray(ds, dtype=float)
    upper = np.max((ds - A) / dts) if len(ds) else 1.0
    with np.errstate(divide="ignore"):
        lower = np.max(np.where(ds + A > 0, dts / np.maximum(ds + A, 1e-300), np.inf)) if len(ds) else 1.0
    return float(max(1.0, upper, lower))


def morse_verdict(ts, L, A, th, D, pair_logs, diamond_distances, pair_budget=2000, regular_span=0.0, tol=DEFAULT_TOL):
    """Morse checks driven by callbacks, so callers choose how pairs are evaluated.

    pair_logs(i, j) returns the Delta-vector of (p_i, p_j) and
    diamond_distances(i, j) the distances of the knots strictly between
    them to the diamond with tips p_i, p_j.
    """
    pairs = select_pairs(len(ts), pair_budget)
    dts, ds = [], []
    theta_fit = 0.0
    d_meas = 0.0
    failures = []
    qi_ok = True
    for i, j in pairs:
        logs = pair_logs(i, j)
        d = float(np.linalg.norm(logs))
        dt = float(ts[j] - ts[i])
        dts.append(dt)
        ds.append(d)
        lower = dt / L - A if np.isfinite(L) else -A
        if d > L * dt + A + tol.stat or d < lower - tol.stat:
            qi_ok = False
            failures.append({"pair": [i, j], "kind": "quasi-isometry", "distance": d, "span": dt})
        if dt < regular_span:
            continue
        if d <= tol.degenerate:
            failures.append({"pair": [i, j], "kind": "regularity", "angle": None})
            d_meas = np.inf
            continue
        ang = angle_to_xi(logs, th)
        theta_fit = max(theta_fit, ang)
        if ang > th.beta:
            failures.append({"pair": [i, j], "kind": "regularity", "angle": ang})
            d_meas = np.inf
            continue
        if j - i >= 2:
            worst = float(np.max(diamond_distances(i, j)))
            d_meas = max(d_meas, worst)
            if worst > D:
                failures.append({"pair": [i, j], "kind": "diamond", "distance": worst})
    return MorseVerdict(
        L_fit=fit_L(dts, ds, A),
        A_fit=float(A),
        theta_fit=float(theta_fit),
        D_measured=float(d_meas),
        pass_=bool(qi_ok and d_meas <= D),
        pairs_checked=len(pairs),
        failures=failures,
    )


def check_morse(path, L, A, th, D, pair_budget=2000, regular_span=0.0, subdivide=0, tol=DEFAULT_TOL):
    """Measured Morse defects of a path against requested (L, A, Theta, D).

    Pairs with time span >= regular_span must be Theta-regular; for those,
    the knots in between are measured against the diamond with the two
    knots as tips.  Shorter pairs only enter the quasi-isometry check.
    Points are compared directly, which is accurate while the path stays
    within a few tens of units of its knots' common base frame; orbit
    paths of long words go through the equivariant evaluation in pingpong.
    """
    if subdivide:
        path = path.subdivided(subdivide)
    pts = path.points
    pairs = [(i, j) for i, j in select_pairs(len(pts), pair_budget) if j - i >= 2]
    triples = [(i, k, j) for i, j in pairs for k in range(i + 1, j)]
    table = {}
    if triples:
        # one stacked evaluation; pairs with irregular tips come back as inf
        # and are never queried, since morse_verdict rejects them first
        dist = diamond_distances_batch(
            [pts[i] for i, _, _ in triples],
            [pts[j] for _, _, j in triples],
            [pts[k] for _, k, _ in triples],
            th,
            tol,
        )
        for (i, _, j), v in zip(triples, dist):
            table.setdefault((i, j), []).append(v)

    def pair_logs(i, j):
        return relative(pts[i], pts[j])[0]

    def diamond_distances(i, j):
        return np.array(table[(i, j)])

    return morse_verdict(path.ts, L, A, th, D, pair_logs, diamond_distances, pair_budget, regular_span, tol)


def replace_segment(path, t1, t2, patch, tol=1e-9):
    """Concatenate path|[.., t1], patch, path|[t2, ..]."""
    if not (t1 < t2) or t1 < path.ts[0] - 1e-12 or t2 > path.ts[-1] + 1e-12:
        raise RangeError(f"[{t1!r}, {t2!r}] is not a subinterval of the path")
    if abs(patch.ts[0] - t1) > 1e-12 or abs(patch.ts[-1] - t2) > 1e-12:
        raise RangeError("patch must be parameterized over [t1, t2]")
    for t, q in ((t1, patch.points[0]), (t2, patch.points[-1])):
        if distance(path.point_at(t), q) > tol:
            raise EndpointMismatch(f"patch endpoint differs from the path at t={t!r}")
    before = [(t, p) for t, p in path.knots if t < t1 - 1e-12]
    after = [(t, p) for t, p in path.knots if t > t2 + 1e-12]
    return PathSample.from_knots(before + patch.knots + after)


def replace_segments(path, replacements, tol=1e-9):
    for t1, t2, patch in sorted(replacements, key=lambda r: r[0]):
        path = replace_segment(path, t1, t2, patch, tol)
    return path


# -- explicit examples in a maximal flat ---------------------------------------

_PLANE = np.array([[1.0, 0.0, -1.0], [1.0, -2.0, 1.0]]) / np.array([[np.sqrt(2.0)], [np.sqrt(6.0)]])


def plane_point(u, v):
    """Point of the diagonal flat of SL(3) with orthonormal plane coordinates (u, v).

    The first axis points along the default xi direction (1, 0, -1)/sqrt2.
    """
    return np.diag(np.exp(u * _PLANE[0] + v * _PLANE[1]))


def polyline_path(corners, t0, speed, step):
    """Constant-speed knot sample of a plane polyline, knots at corners and every ``step`` of arc."""
    corners = [np.asarray(c, dtype=float) for c in corners]
    ts, pts = [t0], [plane_point(*corners[0])]
    t = t0
    for a, b in zip(corners, corners[1:]):
        length = float(np.linalg.norm(b - a))
        pieces = max(1, int(np.ceil(length / step - 1e-12)))
        for k in range(1, pieces + 1):
            c = a + (b - a) * k / pieces
            ts.append(t + (length * k / pieces) / speed)
            pts.append(plane_point(*c))
        t += length / speed
    return PathSample(ts, pts)


def euclidean_counterexample(r):
    """Straight axis on [-2r, 2r] and a staple-shaped patch over [-r, r].

    The patch runs (-r,0) -> (-2r,0) -> (-2r,r) -> (2r,r) -> (2r,0) -> (r,0)
    at speed 4, so it is a (4,0)-quasigeodesic on its own, but the
    replacement revisits points of the axis and its best constant L for a
    fixed A grows linearly with r.
    """
    step = r / 2.0
    path = polyline_path([(-2 * r, 0.0), (2 * r, 0.0)], -2 * r, 1.0, step)
    patch = polyline_path(
        [(-r, 0.0), (-2 * r, 0.0), (-2 * r, r), (2 * r, r), (2 * r, 0.0), (r, 0.0)], -r, 4.0, step
    )
    return path, patch


def fitted_constants(path, A):
    """(L, A) fitted over all knot pairs of a path."""
    pts = path.points
    dts, ds = [], []
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            dts.append(path.ts[j] - path.ts[i])
            ds.append(distance(pts[i], pts[j]))
    return fit_L(dts, ds, A), float(A)


def perturbed_flat_sequence(n, spacing, delta, d=3, seed=0):
    """Points spaced along the xi-geodesic of the diagonal flat, pushed off it by delta.

    Knot k is p_k^{1/2} exp(delta Z_k) p_k^{1/2} with p_k = exp(k spacing xi)
    and Z_k a fixed unit off-diagonal symmetric matrix with alternating
    sign, so consecutive hinges bend in opposite directions.  Returned as
    GradedPoints since the far knots do not fit in float matrices.
    """
    rng = np.random.default_rng(seed)
    xi = default_xi(FacePattern.full(d))
    z = np.triu(rng.standard_normal((d, d)), 1)
    z = z + z.T
    z /= np.linalg.norm(z)
    w, v = np.linalg.eigh(z)
    out = []
    for k in range(n):
        sign = 1.0 if k % 2 == 0 else -1.0
        base = GradedPoint(np.eye(d), k * spacing * xi)
        out.append(from_normalized(base, v, sign * delta * w))
    return out


def parallel_set_proximity(seq, th, tol=DEFAULT_TOL):
    """Largest distance from the sequence to the parallel set of its end flags.

    The end flags are those of the first segment read backwards and of the
    last segment read forwards.
    """
    seq = [as_graded(p) for p in seq]
    tm = graded_flag_of_segment(seq[1], seq[0], th.pattern, tol)
    tp = graded_flag_of_segment(seq[-2], seq[-1], th.pattern, tol)
    frame = parallel_set_of(tp, tm, tol)
    if frame.pattern.is_full:
        return float(np.max(graded_distances_to_flat(seq, frame, tol)))
    _, dists = project_many(np.stack([p.matrix() for p in seq]), frame, tol)
    return float(np.max(dists))


def bump_patch(t1, t2, height, delta, rng, step=1.0):
    """Patch over [t1, t2] for the axis path v = 0 (u = t): a two-leg bump of the given height.

    Interior knots are then pushed off the flat by exp(delta Z) with a
    random unit symmetric Z (traceless), so the patch is not planar.
    """
    mid = 0.5 * (t1 + t2)
    path = polyline_path([(t1, 0.0), (mid, height), (t2, 0.0)], t1, 1.0, step)
    speed = (path.ts[-1] - path.ts[0]) / (t2 - t1)
    ts = t1 + (path.ts - path.ts[0]) / speed
    pts = list(path.points)
    for k in range(1, len(pts) - 1):
        z = rng.standard_normal((3, 3))
        z = z + z.T
        z -= np.trace(z) / 3.0 * np.eye(3)
        w, v = np.linalg.eigh(z / np.linalg.norm(z))
        pts[k] = from_normalized(pts[k], v, delta * rng.random() * w)
    return PathSample(ts, pts)


def random_replacement_trial(rng, length=24.0, step=2.0, max_slope=0.25, delta=0.05):
    """(path, t1, t2, patch): a unit-speed Theta-regular axis and a random bump patch.

    The slope of the bump legs stays below max_slope, so every chord of
    the patch makes an angle at most about atan(max_slope) + O(delta) with xi.
    """
    path = polyline_path([(0.0, 0.0), (length, 0.0)], 0.0, 1.0, step)
    knots = path.ts
    while True:
        i, j = sorted(rng.choice(len(knots), size=2, replace=False))
        if knots[j] - knots[i] >= 3 * step:
            break
    t1, t2 = float(knots[i]), float(knots[j])
    height = (2 * rng.random() - 1) * max_slope * 0.5 * (t2 - t1)
    return path, t1, t2, bump_patch(t1, t2, height, delta, rng)
