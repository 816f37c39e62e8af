"""Reproducible sample inputs: proximal elements for Schottky-type experiments."""

import numpy as np

from .symspace import normalize_det_element, random_element, random_rotation


def proximal_element(rng, d=3, strength=0.7, spread=0.3):
    """h diag(e^lam) h^{-1} with lam = strength (d-1, d-3, ..., -(d-1)) / (d-1).

    h is a random rotation times a random element of size ``spread``, so the
    attracting and repelling flags are in general position.
    """
    lam = strength * np.linspace(1.0, -1.0, d)
    h = random_rotation(rng, d) @ random_element(rng, d, spread)
    return normalize_det_element(h @ np.diag(np.exp(lam)) @ np.linalg.inv(h))


def schottky_elements(seed, n=2, d=3, strength=0.7, spread=0.3):
    rng = np.random.default_rng(seed)
    return [proximal_element(rng, d, strength, spread) for _ in range(n)]


def hyperbolic_pair(translation=8.0, ends=(np.tan(np.pi / 8), np.tan(3 * np.pi / 8))):
    """Two hyperbolic elements of SL(2, R) with disjoint axes.

    The first translates by ``translation`` (hyperbolic length) along the
    imaginary axis of the upper half plane; the second is its conjugate
    with axis from ends[0] to ends[1] (both positive, so the axes are
    ultraparallel).
    """
    a = np.diag([np.exp(translation / 2.0), np.exp(-translation / 2.0)])
    p, q = ends
    if not 0 < p < q:
        raise ValueError("axis ends must satisfy 0 < p < q")
    conj = np.array([[q, p], [1.0, 1.0]]) / np.sqrt(q - p)
    b = conj @ a @ np.linalg.inv(conj)
    return a, normalize_det_element(b)
