import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import diag_point, seeds, spd
from morsecomb.errors import DegenerateSegment, GeometryError, NotNested
from morsecomb.symspace import delta_distance
from morsecomb.weyl import (
    FacePattern,
    ThetaSpec,
    angle_to_xi,
    default_xi,
    eps_star,
    is_delta_vector,
    is_theta_regular,
    opposition_involution,
    sample_theta_directions,
    theta_gap,
    type_direction,
)

FULL3 = FacePattern.full(3)


def test_type_direction():
    np.testing.assert_allclose(type_direction([2, 0, -2]), np.array([2, 0, -2]) / np.sqrt(8))
    for t in (0.1, 1.0, 30.0):
        np.testing.assert_allclose(type_direction(t * np.array([3, 1, -4])), type_direction([3, 1, -4]))
    with pytest.raises(DegenerateSegment):
        type_direction([0, 0, 0])


def test_theta_regular_examples():
    th = ThetaSpec(0.2, FULL3)
    np.testing.assert_allclose(th.xi, np.array([1, 0, -1]) / np.sqrt(2))
    assert is_theta_regular(np.eye(3), diag_point(2, 0, -2), th)
    y = diag_point(1, 1, -2)
    assert angle_to_xi(delta_distance(np.eye(3), y), th) == pytest.approx(np.pi / 6, abs=1e-12)
    assert not is_theta_regular(np.eye(3), y, th)
    with pytest.raises(DegenerateSegment):
        is_theta_regular(np.eye(3), np.eye(3), th)


def test_theta_gap():
    a, b, c = (ThetaSpec(beta, FULL3) for beta in (0.1, 0.3, 0.45))
    assert theta_gap(a, b) == pytest.approx(0.2)
    assert theta_gap(a, c) == pytest.approx(theta_gap(a, b) + theta_gap(b, c))
    with pytest.raises(NotNested):
        theta_gap(b, a)


@pytest.mark.parametrize(
    "v, expected", [([2, 0, -2], [2, 0, -2]), ([3, 1, -4], [4, -1, -3]), ([1, -1], [1, -1])]
)
def test_opposition_examples(v, expected):
    np.testing.assert_allclose(opposition_involution(v), expected)


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=6))
def test_opposition_involutive_and_preserves_chamber(vals):
    v = np.sort(np.array(vals))[::-1]
    v = v - v.mean()
    np.testing.assert_allclose(opposition_involution(opposition_involution(v)), v)
    assert is_delta_vector(opposition_involution(v))


@pytest.mark.parametrize(
    "d, dims",
    [(3, (1,)), (3, (1, 3)), (4, (1,)), (4, (1, 2)), (4, (0, 4)), (4, (2, 2)), (1, (1,))],
)
def test_face_pattern_rejects(d, dims):
    with pytest.raises(GeometryError):
        FacePattern(d, dims)


@pytest.mark.parametrize("d, dims", [(3, (1, 2)), (4, (2,)), (4, (1, 3)), (5, (2, 3)), (2, (1,))])
def test_default_xi_properties(d, dims):
    pat = FacePattern(d, dims)
    xi = default_xi(pat)
    assert np.linalg.norm(xi) == pytest.approx(1.0)
    assert xi.sum() == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(opposition_involution(xi), xi, atol=1e-12)
    for a, b in pat.blocks():
        assert np.ptp(xi[a:b]) == pytest.approx(0.0, abs=1e-12)
    assert 0 < eps_star(pat) <= np.pi / 2


def test_eps_star_full3():
    # distance from (1,0,-1)/sqrt2 to the walls v1 = v2 and v2 = v3
    assert eps_star(FULL3) == pytest.approx(np.pi / 6)


def test_theta_spec_rejects_large_beta():
    with pytest.raises(GeometryError):
        ThetaSpec(np.pi / 6, FULL3)
    with pytest.raises(GeometryError):
        ThetaSpec(0.0, FULL3)


@given(seeds, st.floats(0.05, 0.5))
def test_theta_ball_iota_invariant_and_convex(seed, beta):
    th = ThetaSpec(beta, FULL3)
    rng = np.random.default_rng(seed)
    u, w = sample_theta_directions(rng, th, 2)
    for v in (u, w):
        assert th.contains_direction(v, 1e-12)
        assert th.contains_direction(opposition_involution(v), 1e-12)
    # spherical geodesic between two members stays in the ball
    ang = np.arccos(np.clip(u @ w, -1, 1))
    if ang > 1e-9:
        for t in np.linspace(0, 1, 11):
            p = np.sin((1 - t) * ang) * u + np.sin(t * ang) * w
            assert th.contains_direction(p / np.linalg.norm(p), 1e-12)


def test_sampled_directions_fill_ball(rng):
    th = ThetaSpec(0.4, FULL3)
    dirs = sample_theta_directions(rng, th, 4000)
    angles = np.array([angle_to_xi(v, th) for v in dirs])
    assert angles.max() <= 0.4 + 1e-12
    # uniform on a circle arc in 2d: angles are uniform on [0, beta]
    assert abs(np.median(angles) - 0.2) < 0.02


@given(seeds)
def test_delta_reversal_consistent(seed):
    x, y = spd(seed), spd(seed + 1)
    np.testing.assert_allclose(
        delta_distance(y, x), opposition_involution(delta_distance(x, y)), atol=1e-8
    )
