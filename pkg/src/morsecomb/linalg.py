"""Small dense linear-algebra kernels for symmetric matrices.

Everything goes through ``numpy.linalg.eigh``; no series expansions.
"""

import numpy as np

from .errors import NumericalFailure


def symmetrize(a):
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def sym_eigh(a):
    try:
        w, v = np.linalg.eigh(symmetrize(a))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc
    if not np.all(np.isfinite(w)):
        raise NumericalFailure("non-finite eigenvalues")
    return w, v


def sym_fn(a, fn):
    """Apply a scalar function to a symmetric matrix through its spectrum."""
    w, v = sym_eigh(a)
    return symmetrize((v * fn(w)[..., None, :]) @ np.swapaxes(v, -1, -2))


def spd_power(a, t):
    return sym_fn(a, lambda w: np.power(w, t))


def spd_sqrt(a):
    return sym_fn(a, np.sqrt)


def spd_invsqrt(a):
    return sym_fn(a, lambda w: 1.0 / np.sqrt(w))


def spd_log(a):
    return sym_fn(a, np.log)


def sym_exp(a):
    return sym_fn(a, np.exp)


def unit_angle(u, v):
    """Angle between two unit vectors (any shape, flattened).

    Uses 2*atan2(|u-v|, |u+v|), which stays accurate near 0 and pi where
    arccos of an inner product loses half the digits.
    """
    u = np.ravel(u)
    v = np.ravel(v)
    return 2.0 * np.arctan2(np.linalg.norm(u - v), np.linalg.norm(u + v))


def vector_angle(u, v):
    u = np.ravel(u)
    v = np.ravel(v)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise NumericalFailure("angle with a zero vector")
    return unit_angle(u / nu, v / nv)


def orthonormalize(b):
    """Gram-Schmidt via QR; keeps the nested column spans of ``b``."""
    q, r = np.linalg.qr(b)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs
