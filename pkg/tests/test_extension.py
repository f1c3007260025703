import numpy as np
import pytest

from laxgrid import (
    CellPermutation,
    DyadicGrid,
    TwistMap,
    jacobian_check,
    move_points,
    permutation_twist_map,
    segment_distance,
    snake_order,
    translation,
)
from laxgrid.errors import (
    DomainError,
    GridMismatch,
    PathsIntersect,
    PointsOnBoundary,
    UnsupportedGeometry,
)


def test_twist_half_turn_on_middle_band():
    # rotation angle is pi on the band rho in [1/8, 3/8]
    tw = TwistMap(center=(0.0, 0.0), radius=1.0)
    out = tw.eval(np.array([[0.25, 0.0]]))
    assert np.allclose(out, [[-0.25, 0.0]], atol=1e-12)
    out = tw.eval(np.array([[0.0, 0.375]]))
    assert np.allclose(out, [[0.0, -0.375]], atol=1e-12)


def test_twist_inner_ramp():
    # at rho = 1/16 the angle is 8*pi*rho = pi/2
    tw = TwistMap(center=(0.0, 0.0), radius=1.0)
    out = tw.eval(np.array([[0.0625, 0.0]]))
    assert np.allclose(out, [[0.0, 0.0625]], atol=1e-12)


def test_twist_identity_outside_support():
    tw = TwistMap(center=(0.0, 0.0), radius=1.0)
    pts = np.array([[0.5, 0.0], [0.7, 0.0], [0.0, 0.9]])
    out = tw.eval(pts)
    assert (out == pts).all()  # exact copy outside r < R/2


def test_twist_preserves_radius():
    tw = TwistMap(center=(0.5, 0.5), radius=0.5)
    rng = np.random.default_rng(23)
    pts = 0.5 + (rng.random((200, 2)) - 0.5) * 0.5
    out = tw.eval(pts)
    r_in = np.hypot(pts[:, 0] - 0.5, pts[:, 1] - 0.5)
    r_out = np.hypot(out[:, 0] - 0.5, out[:, 1] - 0.5)
    assert np.allclose(r_in, r_out, atol=1e-12)


def test_twist_inverse():
    tw = TwistMap(center=(0.5, 0.5), radius=0.4)
    rng = np.random.default_rng(29)
    pts = 0.5 + (rng.random((100, 2)) - 0.5) * 0.4
    back = tw.inverse().eval(tw.eval(pts))
    assert np.allclose(back, pts, atol=1e-12)


def test_twist_validation():
    with pytest.raises(DomainError):
        TwistMap(center=(0.5, 0.5), radius=0.0)
    with pytest.raises(DomainError):
        TwistMap(center=(0.5, 0.5), radius=0.3, sign=2)


def test_jacobian_close_to_one():
    tw = TwistMap(center=(0.5, 0.5), radius=0.4)
    rng = np.random.default_rng(31)
    # stay away from the piecewise-profile breakpoints at rho = 1/8, 3/8, 1/2
    theta = rng.random(300) * 2 * np.pi
    rho = np.concatenate([
        rng.uniform(0.02, 0.10, 100),
        rng.uniform(0.15, 0.35, 100),
        rng.uniform(0.40, 0.47, 100),
    ])
    pts = 0.5 + 0.4 * np.stack([rho * np.cos(theta), rho * np.sin(theta)], 1)
    assert jacobian_check(tw, pts) < 1e-4


def test_segment_distance():
    a, b = np.array([0.0, 0.0]), np.array([1.0, 0.0])
    c, d = np.array([0.0, 1.0]), np.array([1.0, 1.0])
    assert segment_distance(a, b, c, d) == pytest.approx(1.0)
    e, f = np.array([0.5, -1.0]), np.array([0.5, 1.0])
    assert segment_distance(a, b, e, f) == 0.0  # crossing


def test_move_points_hits_targets():
    pairs = [
        ((0.2, 0.2), (0.2, 0.45)),
        ((0.8, 0.3), (0.62, 0.3)),
        ((0.5, 0.8), (0.5, 0.8)),  # fixed point is allowed
    ]
    delta = 0.35
    f = move_points(pairs, delta)
    for (src, dst) in pairs:
        got = f(np.array(src, dtype=float))
        assert np.allclose(got, dst, atol=1e-9)
    # nothing moves farther than delta (sampled)
    xs = np.linspace(0.01, 0.99, 40)
    grid_pts = np.array([[x, y] for x in xs for y in xs])
    moved = f(grid_pts)
    assert np.max(np.hypot(*(moved - grid_pts).T)) < delta


def test_move_points_validation():
    with pytest.raises(DomainError):
        move_points([((0.2, 0.2), (0.8, 0.8))], delta=0.1)  # track too long
    with pytest.raises(PointsOnBoundary):
        move_points([((0.0, 0.2), (0.3, 0.2))], delta=0.5)
    with pytest.raises(PathsIntersect):
        move_points([
            ((0.2, 0.5), (0.8, 0.5)),
            ((0.5, 0.2), (0.5, 0.8)),
        ], delta=0.9)
    with pytest.raises(DomainError):
        move_points([((0.2, 0.2), (0.3, 0.2))], delta=0.0)


def test_move_points_empty_is_identity():
    f = move_points([], delta=0.5)
    pts = np.array([[0.3, 0.7]])
    assert np.allclose(f(pts), pts)


def test_permutation_twist_map_realizes_translation():
    g = DyadicGrid(2, 2, "torus")
    f = translation([0.25, 0.0])
    sigma = CellPermutation(f.exact_cell_permutation(g))
    tw = permutation_twist_map(g, sigma)
    centers = g.centers()
    out = tw(centers)
    want = centers[sigma.image]
    # compare on the torus
    diff = np.abs(out - want)
    diff = np.minimum(diff, 1.0 - diff)
    assert np.max(diff) < 1e-9


def test_permutation_twist_map_random_sigma():
    g = DyadicGrid(2, 2, "torus")
    rng = np.random.default_rng(37)
    sigma = CellPermutation(rng.permutation(16))
    tw = permutation_twist_map(g, sigma)
    out = tw(g.centers())
    assert list(g.cell_of_points(out)) == list(sigma.image)


def test_permutation_twist_map_identity():
    g = DyadicGrid(2, 2, "torus")
    tw = permutation_twist_map(g, CellPermutation.identity(16))
    pts = np.array([[0.1, 0.9], [0.6, 0.4]])
    assert np.allclose(tw(pts), pts)


def test_permutation_twist_map_validation():
    g = DyadicGrid(2, 2, "torus")
    with pytest.raises(GridMismatch):
        permutation_twist_map(g, CellPermutation.identity(4))
    with pytest.raises(UnsupportedGeometry):
        permutation_twist_map(DyadicGrid(1, 2, "torus"),
                              CellPermutation.identity(4))
