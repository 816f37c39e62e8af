import numpy as np
import pytest
from hypothesis import given
from scipy.optimize import minimize

from conftest import diag_point, element, seeds, spd
from morsecomb.errors import NotAntipodal, NotOnParallelSet, NotRegular
from morsecomb.flags import Flag, cone_point, flag_of_segment, perturb_flag, transform_flag
from morsecomb.linalg import sym_exp
from morsecomb.parsets import (
    cone_membership,
    d_opp,
    diamond_frame,
    distance_to_diamond,
    distances_to_diamond,
    in_cone,
    is_longitudinal,
    on_parallel_set,
    parallel_set_of,
    project_to_parallel_set,
)
from morsecomb.symspace import act, distance, geodesic_point, random_rotation
from morsecomb.weyl import FacePattern, ThetaSpec, sample_theta_directions

FULL3 = FacePattern.full(3)
TH = ThetaSpec(0.2, FULL3)
STD, OPP = Flag.standard(FULL3), Flag.opposite_standard(FULL3)


def plane(u, v):
    """Zero-sum vector u (1,0,-1)/sqrt2 + v (1,-2,1)/sqrt6."""
    return u * np.array([1, 0, -1]) / np.sqrt(2) + v * np.array([1, -2, 1]) / np.sqrt(6)


def random_antipodal_pair(rng):
    a = Flag(FULL3, random_rotation(rng, 3))
    b = Flag(FULL3, random_rotation(rng, 3))
    return a, b


def test_coordinate_parallel_set():
    frame = parallel_set_of(STD, OPP)
    np.testing.assert_allclose(np.abs(frame.basis), np.eye(3), atol=1e-12)
    assert on_parallel_set(diag_point(1.0, 0.2, -1.2), frame)
    q = np.eye(3)
    q[0, 1] = q[1, 0] = 0.3
    assert not on_parallel_set(q / np.linalg.det(q) ** (1 / 3), frame)
    with pytest.raises(NotAntipodal):
        parallel_set_of(STD, STD)


@given(seeds)
def test_membership_agrees_with_explicit_orthogonality(seed):
    rng = np.random.default_rng(seed)
    tp, tm = random_antipodal_pair(rng)
    frame = parallel_set_of(tp, tm)
    on = frame.point(np.diag(np.exp(rng.standard_normal(3))))
    off = act(element(seed), on)
    for q, expected in ((on, True), (off, None)):
        blocks = frame.blocks
        qi = np.linalg.inv(q)
        explicit = max(
            np.abs(blocks[i].T @ qi @ blocks[j]).max()
            / np.sqrt(np.abs(blocks[i].T @ qi @ blocks[i]).max() * np.abs(blocks[j].T @ qi @ blocks[j]).max())
            for i in range(3)
            for j in range(3)
            if i != j
        )
        assert on_parallel_set(q, frame) == (explicit <= 1e-6)
        if expected is not None:
            assert on_parallel_set(q, frame) == expected


def brute_parallel_set_distance(x, frame):
    """Minimize d(x, B diag(e^z) B^T) by Nelder-Mead over the 2d flat coordinates."""

    def f(z2):
        z = np.array([z2[0], z2[1], -z2[0] - z2[1]])
        return distance(x, frame.point(np.diag(np.exp(z))))

    starts = [np.zeros(2), np.array([1.0, 0.0]), np.array([-1.0, 1.0])]
    best = min(
        (minimize(f, s0, method="Nelder-Mead", options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 5000}) for s0 in starts),
        key=lambda r: r.fun,
    )
    return best.fun


def test_projection_examples():
    frame = parallel_set_of(STD, OPP)
    x = diag_point(0.5, 0.1, -0.6)
    p, dist = project_to_parallel_set(x, frame)
    assert dist == pytest.approx(0.0, abs=1e-7)
    np.testing.assert_allclose(p, x, atol=1e-7)
    for eps in (1e-3, 1e-2, 1e-1):
        e = np.zeros((3, 3))
        e[0, 1] = e[1, 0] = eps
        _, dist = project_to_parallel_set(sym_exp(e), frame)
        assert 0 < dist <= 2 * eps


@given(seeds)
def test_projection_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    frame = parallel_set_of(*random_antipodal_pair(rng))
    x = spd(seed + 1, radius=2.0)
    _, dist = project_to_parallel_set(x, frame)
    assert dist == pytest.approx(brute_parallel_set_distance(x, frame), abs=1e-4)


@given(seeds)
def test_projection_invariance(seed):
    rng = np.random.default_rng(seed)
    tp, tm = random_antipodal_pair(rng)
    x, g = spd(seed + 1), element(seed + 2)
    d0 = d_opp(x, tp, tm)
    assert d_opp(act(g, x), transform_flag(g, tp), transform_flag(g, tm)) == pytest.approx(d0, abs=1e-6)


def test_d_opp_examples():
    assert d_opp(np.eye(3), STD, OPP) == pytest.approx(0.0, abs=1e-9)
    g = element(3)
    assert d_opp(act(g, np.eye(3)), transform_flag(g, STD), transform_flag(g, OPP)) == pytest.approx(0.0, abs=1e-6)


def test_d_opp_continuity():
    rng = np.random.default_rng(4)
    tp, tm = random_antipodal_pair(rng)
    x = spd(9)
    base = d_opp(x, tp, tm)
    moduli = []
    for eps in (1e-1, 1e-2, 1e-3, 1e-4):
        moduli.append(max(abs(d_opp(x, perturb_flag(tp, eps, rng), perturb_flag(tm, eps, rng)) - base) for _ in range(10)))
    assert moduli[-1] < 1e-2
    assert moduli[-1] < moduli[0]


def test_non_full_parallel_set_projection():
    pat = FacePattern(4, (2,))
    rng = np.random.default_rng(2)
    tp = Flag(pat, random_rotation(rng, 4))
    tm = Flag(pat, random_rotation(rng, 4))
    frame = parallel_set_of(tp, tm)
    x = spd(5, d=4)
    p, dist = project_to_parallel_set(x, frame)
    assert on_parallel_set(p, frame)
    assert dist == pytest.approx(distance(x, p), abs=1e-9)
    # p is the nearest point: moving along the parallel set does not help
    for _ in range(20):
        s = np.eye(4)
        blk = rng.standard_normal((2, 2)) * 1e-2
        s[:2, :2] = sym_exp(blk + blk.T)
        assert distance(x, frame.point(frame.inverse @ p @ frame.inverse.T @ s)) >= dist - 1e-7


def test_cone_examples():
    y = diag_point(*(3.0 * TH.xi))
    assert in_cone(np.eye(3), STD, TH, y)
    assert not in_cone(np.eye(3), STD, TH, np.linalg.inv(y))
    assert in_cone(np.eye(3), STD, TH, np.eye(3))
    inside, _ = cone_membership(np.eye(3), STD, TH, diag_point(1, 1, -2))
    assert not inside


@given(seeds)
def test_cone_convexity(seed):
    rng = np.random.default_rng(seed)
    x = spd(seed)
    tau = flag_of_segment(x, spd(seed + 1), FULL3)
    dirs = sample_theta_directions(rng, TH, 2)
    y = cone_point(x, tau, (1 + 3 * rng.random()) * dirs[0])
    z = cone_point(x, tau, (1 + 3 * rng.random()) * dirs[1])
    for t in np.linspace(0, 1, 7):
        assert in_cone(x, tau, ThetaSpec(0.2 + 1e-6, FULL3), geodesic_point(y, z, t))


def test_longitudinal():
    frame = parallel_set_of(STD, OPP)
    y1 = diag_point(0.3, 0.0, -0.3)
    y2 = diag_point(*(np.log(np.diag(y1)) + 2.0 * TH.xi))
    assert is_longitudinal(frame, y1, y2, TH)
    assert not is_longitudinal(frame, y2, y1, TH)
    with pytest.raises(NotOnParallelSet):
        is_longitudinal(frame, act(element(1), y1), y2, TH)


def test_longitudinal_concatenation(rng):
    frame = parallel_set_of(STD, OPP)
    hits = 0
    for _ in range(1000):
        z1 = rng.standard_normal(3)
        z1 -= z1.mean()
        d1, d2 = sample_theta_directions(rng, TH, 2) * (0.5 + 3 * rng.random(2))[:, None]
        y1, y2, y3 = (diag_point(*z) for z in (z1, z1 + d1, z1 + d1 + d2))
        if is_longitudinal(frame, y1, y2, TH) and is_longitudinal(frame, y2, y3, TH):
            hits += 1
            assert is_longitudinal(frame, y1, y3, TH)
    assert hits == 1000


def test_diamond_contains_segment_and_tips():
    th = ThetaSpec(0.45, FULL3)
    g = element(5)
    x1, x2 = act(g, np.eye(3)), act(g, diag_point(*(4.0 * plane(1.0, 0.1))))
    for t in (0.0, 0.3, 0.5, 1.0):
        assert distance_to_diamond(geodesic_point(x1, x2, t), x1, x2, th) <= 1e-6
    with pytest.raises(NotRegular):
        diamond_frame(np.eye(3), diag_point(1, 1, -2), th)


def dense_diamond_distance(z, lam, th, n=801):
    """Min Euclidean distance from z to {w : angle(w, xi), angle(lam - w, xi) <= beta} in the plane."""
    e1 = np.array([1, 0, -1]) / np.sqrt(2)
    e2 = np.array([1, -2, 1]) / np.sqrt(6)
    L = np.linalg.norm(lam)
    us, vs = np.meshgrid(np.linspace(-0.1, L + 0.1, n), np.linspace(-L, L, n))
    w = us[..., None] * e1 + vs[..., None] * e2
    def ang(v):
        nv = np.linalg.norm(v, axis=-1)
        return np.arccos(np.clip((v @ th.xi) / np.where(nv > 0, nv, 1), -1, 1))
    inside = (ang(w) <= th.beta) & (ang(lam - w) <= th.beta)
    return np.min(np.linalg.norm(w[inside] - z, axis=-1))


@pytest.mark.parametrize("offset", [(2.0, 1.5), (0.5, -1.0), (5.0, 3.0), (-1.0, 0.5)])
def test_diamond_distance_matches_dense_sampling(offset):
    th = ThetaSpec(0.3, FULL3)
    lam = plane(6.0, 0.2)
    z = plane(*offset)
    x1, x2, q = np.eye(3), diag_point(*lam), diag_point(*z)
    assert distance_to_diamond(q, x1, x2, th) == pytest.approx(dense_diamond_distance(z, lam, th), abs=2e-3)


@given(seeds)
def test_diamond_distance_invariance(seed):
    th = ThetaSpec(0.3, FULL3)
    g = element(seed)
    x1, x2 = np.eye(3), diag_point(*plane(5.0, 0.3))
    q = spd(seed + 1)
    d0 = distance_to_diamond(q, x1, x2, th)
    assert distance_to_diamond(act(g, q), act(g, x1), act(g, x2), th) == pytest.approx(d0, abs=1e-6)
    # an upper bound on the true distance, which is at least the distance to the flat
    _, to_flat = project_to_parallel_set(q, parallel_set_of(STD, OPP))
    assert d0 >= to_flat - 1e-7


@pytest.mark.parametrize("delta", [0.4, 0.2, 0.1, 0.05])
def test_diamond_continuity_in_tips(delta):
    """Points of diamond(x1, x2) stay within about delta of diamond(y1, x2), |x1 y1| = delta."""
    rng = np.random.default_rng(0)
    x1, x2 = np.eye(3), diag_point(*plane(6.0, 0.0))
    samples = [diag_point(*plane(u, v)) for u, v in [(1, 0.2), (3, 0), (3, -0.5), (5, 0.1), (0.5, 0)]]
    worst = 0.0
    for _ in range(5):
        y1 = geodesic_point(x1, act(element(int(rng.integers(1 << 30))), x1), 1.0)
        y1 = geodesic_point(x1, y1, delta / max(distance(x1, y1), 1e-12))
        new = diamond_frame(y1, x2, ThetaSpec(0.45, FULL3))
        worst = max(worst, max(distances_to_diamond(samples, new, ThetaSpec(0.45, FULL3))))
    # nearby tips and an enlarged Theta keep the old diamond close
    assert worst <= 2 * delta + 1e-6
