"""Parallel sets, Theta-cones and diamonds.

For a transverse flag pair (tau_+, tau_-) the space splits as
R^d = W_1 + ... + W_m with W_j = V+_{c_j} cap V-_{d - c_{j-1}}.  Writing B for
the matrix of block bases, the parallel set is {B S B^T : S block diagonal
SPD}, and q lies on it iff the blocks are pairwise orthogonal for the inner
product given by q^{-1}.

Nearest-point projection is a Riemannian descent over the block-diagonal
SPD factor, which is a totally geodesic product of smaller SPD cones.  Since
d^2/2 is 1-strongly geodesically convex, the norm of the block gradient
bounds the distance to the minimizer, which gives a certified stopping rule.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSegment,
    NoConvergence,
    NotAntipodal,
    NotOnParallelSet,
    NotRegular,
)
from .flags import Flag, flag_of_segment, flags_equal, is_antipodal, segment_frame
from .graded import (
    GradedPoint,
    as_graded,
    distance_to_flat_point,
    graded_svd,
    project_to_flat,
    relative,
)
from .linalg import orthonormalize, symmetrize
from .symspace import distance, normalize_det
from .tolerances import DEFAULT_TOL
from .weyl import angle_to_xi, FacePattern


@dataclass(frozen=True, eq=False)
class ParallelSetFrame:
    pattern: FacePattern
    basis: np.ndarray
    tau_plus: Flag = None
    tau_minus: Flag = None

    def __post_init__(self):
        object.__setattr__(self, "basis", np.array(self.basis, dtype=float))
        object.__setattr__(self, "inverse", np.linalg.inv(self.basis))

    @property
    def blocks(self):
        return [self.basis[:, a:b] for a, b in self.pattern.blocks()]

    def point(self, s):
        """Point of the parallel set with block coordinates s (block-diagonal SPD)."""
        return normalize_det(symmetrize(self.basis @ s @ self.basis.T))


def _intersection(a, b, dim):
    """Orthonormal basis of span(a) cap span(b), expected to have dimension ``dim``."""
    m = np.hstack([a, -b])
    _, _, vt = np.linalg.svd(m)
    null = vt[-dim:].T if dim else np.zeros((m.shape[1], 0))
    return orthonormalize(a @ null[: a.shape[1]])


def parallel_set_of(tp, tm, tol=DEFAULT_TOL):
    ok, margin = is_antipodal(tp, tm, tol)
    if not ok:
        raise NotAntipodal(0, 1, (0, 0), f"flags are not antipodal (margin {margin!r})")
    d = tp.pattern.d
    cols = []
    for a, b in tp.pattern.blocks():
        cols.append(_intersection(tp.subspace(b), tm.subspace(d - a), b - a))
    return ParallelSetFrame(tp.pattern, np.hstack(cols), tp, tm)


def frame_of_flat(basis, d):
    """Frame whose parallel set is the maximal flat {basis diag(e^z) basis^T}."""
    return ParallelSetFrame(FacePattern.full(d), basis)


def _block_mask(pattern):
    mask = np.zeros((pattern.d, pattern.d), dtype=bool)
    for a, b in pattern.blocks():
        mask[a:b, a:b] = True
    return mask


def off_block_defect(q, frame):
    """Largest normalized off-block entry of B^T q^{-1} B (0 on the parallel set)."""
    m = frame.basis.T @ np.linalg.solve(q, frame.basis)
    diag = np.sqrt(np.abs(np.diagonal(m, axis1=-2, axis2=-1)))
    m = m / diag[..., :, None] / diag[..., None, :]
    m = np.where(_block_mask(frame.pattern), 0.0, m)
    return np.max(np.abs(m), axis=(-2, -1))


def on_parallel_set(q, frame, tol=DEFAULT_TOL):
    return bool(off_block_defect(q, frame) <= tol.flag)


def _eig_fn(w, v, values):
    return (v * values[..., None, :]) @ np.swapaxes(v, -1, -2)


def _descend(ys, mask, tol):
    """Minimize d(y, S) over block-diagonal SPD S for a stack of y's.

    Riemannian gradient steps S <- S^{1/2} exp(t G) S^{1/2} with
    G = blockdiag(log(S^{-1/2} y S^{-1/2})).  The full GL-invariant metric is
    used; the optimum automatically matches determinants.
    """
    n = ys.shape[0]
    s = np.where(mask, ys, 0.0)
    step = np.ones(n)

    def evaluate(s_stack, y_stack):
        w, v = np.linalg.eigh(s_stack)
        half = _eig_fn(w, v, np.sqrt(w))
        ihalf = _eig_fn(w, v, 1.0 / np.sqrt(w))
        m = symmetrize(ihalf @ y_stack @ ihalf)
        mw, mv = np.linalg.eigh(m)
        logm = _eig_fn(mw, mv, np.log(mw))
        return half, np.sum(np.log(mw) ** 2, axis=-1), np.where(mask, logm, 0.0)

    half, f, g = evaluate(s, ys)
    for _ in range(tol.proj_maxiter):
        grad_norm = np.linalg.norm(g, axis=(-2, -1))
        active = grad_norm > tol.proj
        if not np.any(active):
            return s
        idx = np.nonzero(active)[0]
        w, v = np.linalg.eigh(step[idx, None, None] * g[idx])
        trial = symmetrize(half[idx] @ _eig_fn(w, v, np.exp(w)) @ half[idx])
        t_half, t_f, t_g = evaluate(trial, ys[idx])
        t_gn = np.linalg.norm(t_g, axis=(-2, -1))
        good = t_f <= f[idx] - 1e-4 * step[idx] * 2.0 * grad_norm[idx] ** 2
        # below float resolution of f, fall back to gradient decrease
        good |= (t_f <= f[idx] + 1e-9 * (1.0 + f[idx])) & (t_gn < grad_norm[idx])
        acc = idx[good]
        s[acc], half[acc], f[acc], g[acc] = trial[good], t_half[good], t_f[good], t_g[good]
        step[acc] = np.minimum(1.0, 2.0 * step[acc])
        step[idx[~good]] *= 0.5
    if np.any(np.linalg.norm(g, axis=(-2, -1)) > tol.proj):
        raise NoConvergence(tol.proj_maxiter, "parallel-set projection did not reach tolerance")
    return s


def graded_distances_to_flat(points, frame, tol=DEFAULT_TOL):
    """Distances from GradedPoints to a maximal flat, without forming matrices.

    B^{-1} q B^{-T} is rebuilt in graded form from the SVD of
    B^{-1} K exp(a/2), so far points cost no precision.
    """
    if not frame.pattern.is_full:
        raise ValueError("graded projection needs a maximal flat")
    points = [as_graded(p) for p in points]
    cs = np.stack([frame.inverse @ p.frame for p in points])
    halves = np.stack([0.5 * p.logs for p in points])
    u, s, _ = graded_svd(np.zeros_like(halves), cs, halves)
    _, dists = project_to_flat(u, 2.0 * s, tol)
    return np.atleast_1d(dists)


def project_many(xs, frame, tol=DEFAULT_TOL):
    """Project a stack of points onto the parallel set; returns (points, distances)."""
    xs = np.asarray(xs, dtype=float)
    single = xs.ndim == 2
    if single:
        xs = xs[None]
    ys = symmetrize(frame.inverse @ xs @ frame.inverse.T)
    if frame.pattern.is_full:
        w, v = np.linalg.eigh(ys)
        z, _ = project_to_flat(v, np.log(w), tol)
        s = np.exp(z)[..., :, None] * np.eye(frame.pattern.d)
    else:
        s = _descend(ys, _block_mask(frame.pattern), tol)
    ps = normalize_det(symmetrize(frame.basis @ s @ frame.basis.T))
    dists = distance(xs, ps)
    if single:
        return ps[0], float(dists[0])
    return ps, dists


def project_to_parallel_set(x, frame, tol=DEFAULT_TOL):
    return project_many(x, frame, tol)


def d_opp(x, tp, tm, tol=DEFAULT_TOL):
    return project_to_parallel_set(x, parallel_set_of(tp, tm, tol), tol)[1]


def cone_membership(x, tau, th, y, tol=DEFAULT_TOL):
    """(inside, diagnostic) for y in the Theta-cone at x toward tau.

    diagnostic is None for clean answers and a short reason otherwise,
    e.g. when the segment xy is too irregular for its flag to exist.
    """
    logs, _ = segment_frame(x, y)
    if np.linalg.norm(logs) <= tol.degenerate:
        return True, None
    if angle_to_xi(logs, th) > th.beta:
        return False, None
    try:
        f = flag_of_segment(x, y, th.pattern, tol)
    except NotRegular as exc:
        return False, f"not regular at dimension {exc.k}"
    return bool(flags_equal(f, tau, tol)), None


def in_cone(x, tau, th, y, tol=DEFAULT_TOL):
    return cone_membership(x, tau, th, y, tol)[0]


def is_longitudinal(frame, y1, y2, th, tol=DEFAULT_TOL):
    for name, y in (("y1", y1), ("y2", y2)):
        if not on_parallel_set(y, frame, tol):
            raise NotOnParallelSet(f"{name} is not on the parallel set")
    return in_cone(y1, frame.tau_plus, th, y2, tol)


# -- diamonds ---------------------------------------------------------------


def _project_circular_cone(z, xi, beta):
    """Euclidean projection onto {z : angle(z, xi) <= beta} (zero-sum vectors)."""
    a = z @ xi
    w = z - a * xi
    r = np.linalg.norm(w)
    tb = np.tan(beta)
    if r <= a * tb:
        return z
    if r * tb <= -a:
        return np.zeros_like(z)
    u = np.cos(beta) * xi + np.sin(beta) * (w / r)
    return (z @ u) * u


def _in_cone_coords(z, xi, beta, slack=0.0):
    n = np.linalg.norm(z)
    if n <= 1e-300:
        return True
    a = (z @ xi) / n
    return bool(a >= np.cos(beta + slack))


def _in_cone_stack(zs, th):
    n = np.linalg.norm(zs, axis=-1)
    return (n <= 1e-300) | ((zs @ th.xi) >= np.cos(th.beta) * n)


def _in_diamond_coords(z, lam, xi, beta, slack=0.0):
    return _in_cone_coords(z, xi, beta, slack) and _in_cone_coords(lam - z, xi, beta, slack)


def project_to_diamond_coords(z, lam, xi, beta, maxiter=5000, tol=1e-13):
    """Euclidean projection of z onto K cap (lam - K), K the circular cone about xi.

    Quick exits cover the cases where one cone projection already lands in
    the other cone; otherwise Dykstra's alternating projections, followed by
    a bisection toward lam/2 that makes the result exactly feasible.
    """
    z = np.asarray(z, dtype=float)
    if _in_diamond_coords(z, lam, xi, beta):
        return z
    pa = _project_circular_cone(z, xi, beta)
    if _in_diamond_coords(pa, lam, xi, beta):
        return pa
    pb = lam - _project_circular_cone(lam - z, xi, beta)
    if _in_diamond_coords(pb, lam, xi, beta):
        return pb
    cur = z.copy()
    p_inc = np.zeros_like(z)
    q_inc = np.zeros_like(z)
    for _ in range(maxiter):
        y = _project_circular_cone(cur + p_inc, xi, beta)
        p_inc = cur + p_inc - y
        nxt = lam - _project_circular_cone(lam - (y + q_inc), xi, beta)
        q_inc = y + q_inc - nxt
        if np.linalg.norm(nxt - cur) <= tol * (1.0 + np.linalg.norm(lam)):
            cur = nxt
            break
        cur = nxt
    if _in_diamond_coords(cur, lam, xi, beta):
        return cur
    center = 0.5 * lam
    lo, hi = 0.0, 1.0  # fraction of the way from center to cur
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _in_diamond_coords(center + mid * (cur - center), lam, xi, beta):
            lo = mid
        else:
            hi = mid
    return center + lo * (cur - center)


@dataclass(frozen=True, eq=False)
class DiamondFrame:
    """Flat through the tips, seen from x1.

    In x1's normalized coordinates the flat is {U exp(z) U^T}; x1 sits at
    z = 0 and x2 at z = lam.
    """

    x1: GradedPoint
    x2: GradedPoint
    frame: np.ndarray
    lam: np.ndarray


def diamond_frame(x1, x2, th, tol=DEFAULT_TOL):
    x1, x2 = as_graded(x1), as_graded(x2)
    lam, u = relative(x1, x2)
    if np.linalg.norm(lam) <= tol.degenerate:
        raise DegenerateSegment("diamond with coincident tips")
    if angle_to_xi(lam, th) > th.beta:
        raise NotRegular(None, "tips of the diamond span a segment that is not Theta-regular")
    return DiamondFrame(x1, x2, u, lam)


def _stack(points):
    return np.stack([p.frame for p in points]), np.stack([p.logs for p in points])


def diamond_distances_batch(x1s, x2s, qs, th, tol=DEFAULT_TOL):
    """Certified upper bounds on d(q_n, diamond(x1_n, x2_n)) for stacked triples.

    Each q is projected to the flat through the tips; its flat coordinates
    are then moved to the nearest point of the cone intersection, and the
    distance from q to that (genuine) diamond point is returned.  Triples
    whose tips do not span a Theta-regular segment get inf.
    """
    if not len(qs):
        return np.zeros(0)
    k1, a1 = _stack([as_graded(p) for p in x1s])
    k2, a2 = _stack([as_graded(p) for p in x2s])
    kq, aq = _stack([as_graded(p) for p in qs])
    k1t = np.swapaxes(k1, -1, -2)
    u, s2, _ = graded_svd(-0.5 * a1, k1t @ k2, 0.5 * a2)
    lam = 2.0 * s2
    lam -= lam.mean(axis=-1, keepdims=True)
    uq, sq, _ = graded_svd(-0.5 * a1, k1t @ kq, 0.5 * aq)
    ls = 2.0 * sq
    ls -= ls.mean(axis=-1, keepdims=True)
    cs = np.swapaxes(u, -1, -2) @ uq
    norms = np.linalg.norm(lam, axis=-1)
    cos = (lam @ th.xi) / np.where(norms > 0, norms, 1.0)
    ok = (norms > tol.degenerate) & (np.arccos(np.clip(cos, -1.0, 1.0)) <= th.beta)
    out = np.full(len(qs), np.inf)
    if not ok.any():
        return out
    z, _ = project_to_flat(cs[ok], ls[ok], tol)
    z = np.atleast_2d(z)
    z = z - z.mean(axis=-1, keepdims=True)
    lam_ok = lam[ok]
    inside = _in_cone_stack(z, th) & _in_cone_stack(lam_ok - z, th)
    best = z.copy()
    for n in np.nonzero(~inside)[0]:
        best[n] = project_to_diamond_coords(z[n], lam_ok[n], th.xi, th.beta)
    out[ok] = distance_to_flat_point(cs[ok], ls[ok], best)
    return out


def distances_to_diamond(qs, frame, th, tol=DEFAULT_TOL):
    """diamond_distances_batch for many points against one diamond."""
    qs = list(qs)
    return diamond_distances_batch([frame.x1] * len(qs), [frame.x2] * len(qs), qs, th, tol)


def distance_to_diamond(q, x1, x2, th, tol=DEFAULT_TOL):
    frame = diamond_frame(x1, x2, th, tol)
    return float(distances_to_diamond([q], frame, th, tol)[0])
