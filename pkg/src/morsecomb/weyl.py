"""Chamber combinatorics of the model flat: face patterns, xi, Theta-balls."""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DegenerateSegment, GeometryError, NotNested
from .linalg import unit_angle
from .tolerances import DEFAULT_TOL


@dataclass(frozen=True)
class FacePattern:
    """Subspace dimensions of a flag type; must be symmetric under k -> d-k."""

    d: int
    dims: tuple

    def __post_init__(self):
        dims = tuple(int(k) for k in self.dims)
        object.__setattr__(self, "dims", dims)
        if self.d < 2:
            raise GeometryError(f"dimension must be at least 2, got {self.d}")
        if not dims:
            raise GeometryError("face pattern must be nonempty")
        if any(b <= a for a, b in zip(dims, dims[1:])):
            raise GeometryError(f"pattern dims must be strictly increasing: {dims}")
        if dims[0] < 1 or dims[-1] > self.d - 1:
            raise GeometryError(f"pattern dims must lie in 1..{self.d - 1}: {dims}")
        if set(dims) != {self.d - k for k in dims}:
            raise GeometryError(f"pattern {dims} is not invariant under k -> {self.d}-k")

    @classmethod
    def full(cls, d):
        return cls(d, tuple(range(1, d)))

    @property
    def is_full(self):
        return len(self.dims) == self.d - 1

    def blocks(self):
        """Index ranges [start, stop) of the blocks cut out by the pattern."""
        cuts = (0,) + self.dims + (self.d,)
        return [(a, b) for a, b in zip(cuts, cuts[1:])]

    def block_sizes(self):
        return [b - a for a, b in self.blocks()]

    def expand(self, values):
        """Repeat one value per block into a d-vector."""
        return np.repeat(np.asarray(values, dtype=float), self.block_sizes())


def opposition_involution(v):
    v = np.asarray(v, dtype=float)
    return -v[..., ::-1]


def is_delta_vector(v, tol=DEFAULT_TOL):
    v = np.asarray(v, dtype=float)
    return bool(np.all(np.diff(v) <= tol.sum) and abs(v.sum()) <= tol.sum * max(1.0, np.abs(v).max()))


@lru_cache(maxsize=None)
def _default_xi(pattern):
    d = pattern.d
    base = np.arange(d - 1, -d, -2, dtype=float)
    avg = [base[a:b].mean() for a, b in pattern.blocks()]
    xi = pattern.expand(avg)
    xi = xi / np.linalg.norm(xi)
    xi.setflags(write=False)
    return xi


def default_xi(pattern):
    return _default_xi(pattern).copy()


def check_xi(xi, pattern, tol=1e-9):
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (pattern.d,):
        raise GeometryError(f"xi must have length {pattern.d}")
    if abs(np.linalg.norm(xi) - 1.0) > tol or abs(xi.sum()) > tol:
        raise GeometryError("xi must be a unit zero-sum vector")
    if np.max(np.abs(xi + xi[::-1])) > tol:
        raise GeometryError("xi is not fixed by the opposition involution")
    for a, b in pattern.blocks():
        if np.ptp(xi[a:b]) > tol:
            raise GeometryError("xi is not constant on the pattern blocks")
    if np.any(np.diff(xi)[np.array(pattern.dims) - 1] >= -tol):
        raise GeometryError("xi must strictly decrease across blocks")
    return xi


def eps_star(pattern, xi=None):
    """Spherical distance from xi to the walls bounding the open star.

    The walls are the hyperplanes v_k = v_{k+1} for k in the pattern; the
    angle from a unit vector to the wall with unit normal (e_k - e_{k+1})/sqrt2
    is arcsin(|xi_k - xi_{k+1}| / sqrt2).
    """
    xi = default_xi(pattern) if xi is None else np.asarray(xi, dtype=float)
    gaps = np.array([xi[k - 1] - xi[k] for k in pattern.dims])
    return float(np.min(np.arcsin(np.clip(np.abs(gaps) / np.sqrt(2.0), 0.0, 1.0))))


@dataclass(frozen=True)
class ThetaSpec:
    """Closed angular ball of radius beta about xi inside the open star."""

    beta: float
    pattern: FacePattern
    xi: np.ndarray = field(default=None, compare=False)

    def __post_init__(self):
        xi = default_xi(self.pattern) if self.xi is None else check_xi(self.xi, self.pattern)
        object.__setattr__(self, "xi", np.array(xi, dtype=float))
        object.__setattr__(self, "beta", float(self.beta))
        limit = eps_star(self.pattern, xi)
        if not (0.0 < self.beta < limit):
            raise GeometryError(
                f"beta must lie in (0, {limit!r}) for pattern {self.pattern.dims}, got {self.beta!r}"
            )

    @property
    def d(self):
        return self.pattern.d

    def contains_direction(self, u, slack=0.0):
        return angle_to_xi(u, self) <= self.beta + slack

    def to_dict(self):
        return {"beta": self.beta, "pattern": list(self.pattern.dims)}

    @classmethod
    def from_dict(cls, data, d):
        return cls(float(data["beta"]), FacePattern(d, tuple(data["pattern"])))


def type_direction(v, tol=DEFAULT_TOL):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n <= tol.degenerate:
        raise DegenerateSegment("zero Delta-vector has no direction")
    return v / n


def angle_to_xi(v, th):
    return float(unit_angle(type_direction(v), th.xi))


def is_theta_regular(x, y, th, tol=DEFAULT_TOL):
    from .symspace import delta_distance

    return angle_to_xi(delta_distance(x, y), th) <= th.beta


def theta_gap(inner, outer):
    if inner.pattern != outer.pattern or not np.allclose(inner.xi, outer.xi):
        raise GeometryError("Theta-balls must share pattern and center")
    if inner.beta >= outer.beta:
        raise NotNested(f"inner radius {inner.beta!r} is not below outer radius {outer.beta!r}")
    return outer.beta - inner.beta


def theta_basis(th):
    """Orthonormal basis of the tangent space to the direction sphere at xi."""
    d = th.d
    # zero-sum hyperplane, then remove xi
    a = np.eye(d) - 1.0 / d
    a = a - np.outer(th.xi, th.xi @ a)
    u, s, _ = np.linalg.svd(a)
    return u[:, : d - 2]


def sample_theta_directions(rng, th, size, radius=None):
    """Directions uniform (w.r.t. spherical measure) in the ball of ``radius`` about xi.

    Returned vectors are unit, zero-sum and sorted descending, so they are
    valid Delta-directions.  Sorting only permutes within blocks and
    therefore preserves the angle to xi.
    """
    radius = th.beta if radius is None else radius
    basis = theta_basis(th)
    m = basis.shape[1]
    out = np.empty((size, th.d))
    if m == 0:
        out[:] = th.xi
        return out
    for i in range(size):
        w = rng.standard_normal(m)
        w /= np.linalg.norm(w)
        # angle density on S^m is proportional to sin^(m-1)
        while True:
            ang = radius * rng.random()
            if m == 1 or rng.random() <= (np.sin(ang) / np.sin(radius)) ** (m - 1):
                break
        u = np.cos(ang) * th.xi + np.sin(ang) * (basis @ w)
        out[i] = np.sort(u)[::-1]
    return out
