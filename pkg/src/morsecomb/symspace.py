"""The symmetric space X = SL(d,R)/SO(d) as unit-determinant SPD matrices.

A coset gK is stored as the matrix g g^T; the group acts by g.P = g P g^T.
The Delta-valued distance from x to y is the descending vector of log
eigenvalues of x^{-1} y, and the Riemannian distance is its Euclidean norm.
Most kernels accept stacks of matrices (leading batch axes).
"""

import numpy as np

from .errors import DegenerateElement, GeometryError, NumericalFailure
from .linalg import (
    spd_invsqrt,
    spd_log,
    spd_power,
    spd_sqrt,
    sym_eigh,
    symmetrize,
    vector_angle,
)
from .tolerances import DEFAULT_TOL


def as_point(mat, tol=DEFAULT_TOL):
    """Validate and symmetrize a point of X."""
    p = np.array(mat, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise GeometryError(f"point must be a square matrix, got shape {p.shape}")
    if np.max(np.abs(p - p.T)) > tol.sym * max(1.0, np.max(np.abs(p))):
        raise GeometryError("point is not symmetric")
    p = symmetrize(p)
    w = np.linalg.eigvalsh(p)
    if w[0] <= 0:
        raise GeometryError("point is not positive definite")
    if abs(np.prod(w) - 1.0) > tol.det:
        raise GeometryError(f"point has determinant {np.prod(w)!r}, expected 1")
    return p


def as_group_element(mat, tol=DEFAULT_TOL):
    g = np.array(mat, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise GeometryError(f"group element must be square, got shape {g.shape}")
    det = np.linalg.det(g)
    if abs(det - 1.0) > tol.det:
        raise DegenerateElement(f"group element has determinant {det!r}, expected 1")
    return g


def normalize_det(a):
    """Scale a positive-determinant matrix (or stack) to determinant one."""
    d = a.shape[-1]
    sign, logdet = np.linalg.slogdet(a)
    if np.any(sign <= 0):
        raise NumericalFailure("matrix with non-positive determinant")
    return a * np.exp(-logdet / d)[..., None, None]


def _relative(x, y):
    """Symmetric matrix L^{-1} y L^{-T} with x = L L^T; same spectrum as x^{-1} y."""
    try:
        low = np.linalg.cholesky(symmetrize(x))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc
    tmp = np.linalg.solve(low, symmetrize(y))
    m = np.linalg.solve(low, np.swapaxes(tmp, -1, -2))
    return symmetrize(m)


def delta_distance(x, y):
    """Delta-valued distance d_Delta(x, y), sorted descending."""
    m = _relative(x, y)
    try:
        w = np.linalg.eigvalsh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise NumericalFailure("relative matrix is not positive definite")
    v = np.log(w)[..., ::-1]
    # remove the trace drift accumulated in long products
    return v - v.mean(axis=-1, keepdims=True)


def distance(x, y):
    return np.linalg.norm(delta_distance(x, y), axis=-1)


def geodesic_point(x, y, t):
    """Point at fraction t of the geodesic from x to y."""
    s = spd_sqrt(x)
    si = spd_invsqrt(x)
    m = symmetrize(si @ y @ si)
    return symmetrize(s @ spd_power(m, t) @ s)


def midpoint(x, y):
    return geodesic_point(x, y, 0.5)


def cartan_involution(x, q):
    """Point reflection s_x(q) = x q^{-1} x."""
    return symmetrize(x @ np.linalg.solve(q, x))


def act(g, x, tol=DEFAULT_TOL):
    """g.x = g x g^T, renormalized to determinant one."""
    g = np.asarray(g, dtype=float)
    if abs(np.linalg.det(g)) < tol.degenerate:
        raise DegenerateElement("group element is singular")
    return normalize_det(symmetrize(g @ x @ np.swapaxes(g, -1, -2)))


def orbit_point(g, tol=DEFAULT_TOL):
    """g applied to the base point I."""
    return act(g, np.eye(np.shape(g)[-1]), tol)


def log_direction(x, y):
    """Tangent vector at x pointing to y, in orthonormal coordinates at x.

    Returned as the symmetric matrix log(x^{-1/2} y x^{-1/2}); its Frobenius
    norm is d(x, y).  Frobenius inner products of these matrices are the
    Riemannian inner products at x.
    """
    si = spd_invsqrt(x)
    return spd_log(symmetrize(si @ y @ si))


def riemannian_angle(at, p, q):
    """Angle at ``at`` of the geodesic triangle (p, at, q)."""
    return vector_angle(log_direction(at, p), log_direction(at, q))


def congruence_element(x, y, x2, y2):
    """Group element g with g.x = x2 and g.y = y2.

    Valid when d_Delta(x, y) = d_Delta(x2, y2); built by aligning adapted
    frames h (with h.I = x, h.exp(v) = y) of both pairs.
    """
    h1 = _adapted_frame(x, y)
    h2 = _adapted_frame(x2, y2)
    return h2 @ np.linalg.inv(h1)


def _adapted_frame(x, y):
    low = np.linalg.cholesky(symmetrize(x))
    w, u = sym_eigh(_relative(x, y))
    u = u[:, ::-1]
    if np.linalg.det(u) < 0:
        u[:, -1] *= -1.0
    h = low @ u
    return normalize_det_element(h)


def normalize_det_element(g):
    det = np.linalg.det(g)
    if det <= 0:
        raise DegenerateElement("element with non-positive determinant")
    return g / det ** (1.0 / g.shape[0])


def random_element(rng, d, scale=1.0):
    """Random element of SL(d) with Gaussian entries (positive determinant)."""
    while True:
        g = np.eye(d) + scale * rng.standard_normal((d, d))
        det = np.linalg.det(g)
        if abs(det) > 1e-3:
            break
    if det < 0:
        g[:, 0] *= -1.0
        det = -det
    return g / det ** (1.0 / d)


def random_point(rng, d, scale=1.0):
    return orbit_point(random_element(rng, d, scale))


def random_rotation(rng, d):
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1.0
    return q
