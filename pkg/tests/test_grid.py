import numpy as np
import pytest
from fractions import Fraction

from laxgrid import DyadicGrid, RefinedSet, snake_order
from laxgrid.errors import GridMismatch
from laxgrid.grid import coarse_index_of_fine, fine_cells_of_coarse_cell


def test_grid_basics():
    g = DyadicGrid(2, 3, "torus")
    assert g.side == 8
    assert g.q == 64
    assert g.cell_measure == Fraction(1, 64)
    assert abs(g.cell_diameter() - np.sqrt(2) / 8) < 1e-15

    g1 = DyadicGrid(1, 4, "cube")
    assert g1.side == 16
    assert g1.q == 16
    assert g1.cell_measure == Fraction(1, 16)

    assert DyadicGrid(2, 0).q == 1
    assert DyadicGrid(3, 2).q == 64


def test_grid_validation():
    with pytest.raises(ValueError):
        DyadicGrid(2, -1)
    with pytest.raises(ValueError):
        DyadicGrid(0, 2)
    with pytest.raises(ValueError):
        DyadicGrid(2, 2, "klein")


def test_index_roundtrip():
    g = DyadicGrid(2, 3, "torus")
    for idx in range(g.q):
        assert g.flat_index(g.multi_index(idx)) == idx
    assert g.multi_index(0) == (0, 0)
    assert g.flat_index((7, 7)) == 63


def test_centers_and_cells():
    g = DyadicGrid(2, 2, "torus")
    centers = g.centers()
    assert centers.shape == (16, 2)
    # every center lies in its own cell
    assert list(g.cell_of_points(centers)) == list(range(16))
    c0 = g.cell_center(0)
    assert np.allclose(c0, [0.125, 0.125])
    assert np.allclose(g.cell_lower(0), [0.0, 0.0])


def test_cell_of_points_boundaries():
    gt = DyadicGrid(2, 2, "torus")
    gc = DyadicGrid(2, 2, "cube")
    # cells are half-open; the far corner wraps on the torus, clamps on the cube
    assert gt.cell_of_points(np.array([[1.0, 1.0]]))[0] == 0
    assert gc.cell_of_points(np.array([[1.0, 1.0]]))[0] == 15
    assert gt.cell_of_points(np.array([[0.25, 0.0]]))[0] == gt.flat_index((1, 0))


def test_dist_topologies():
    gt = DyadicGrid(2, 1, "torus")
    gc = DyadicGrid(2, 1, "cube")
    a = np.array([[0.05, 0.0]])
    b = np.array([[0.95, 0.0]])
    assert abs(gt.dist(a, b)[0] - 0.1) < 1e-15
    assert abs(gc.dist(a, b)[0] - 0.9) < 1e-15


def test_snake_order_frozen():
    assert snake_order(DyadicGrid(2, 1, "torus")) == (0, 1, 3, 2)
    assert snake_order(DyadicGrid(2, 2, "torus")) == (
        0, 1, 2, 3, 7, 6, 5, 9, 10, 11, 15, 14, 13, 12, 8, 4)
    # degenerate single-cell grid: singleton sequence
    assert snake_order(DyadicGrid(2, 0, "torus")) == (0,)
    assert snake_order(DyadicGrid(1, 0, "torus")) == (0,)


def test_snake_order_is_adjacent_cycle():
    for dim, order in [(1, 3), (2, 2), (2, 3), (3, 2)]:
        g = DyadicGrid(dim, order, "torus")
        path = snake_order(g)
        assert sorted(path) == list(range(g.q))
        for i in range(g.q):
            assert g.face_adjacent(path[i], path[(i + 1) % g.q])


def test_face_adjacent():
    g = DyadicGrid(2, 2, "torus")
    assert g.face_adjacent(0, 1)
    assert g.face_adjacent(0, 3)  # wraparound
    assert not g.face_adjacent(0, 5)  # diagonal
    gc = DyadicGrid(2, 2, "cube")
    assert not gc.face_adjacent(0, 3)  # no wraparound on the cube


def test_refined_set_measures():
    g = DyadicGrid(2, 1, "torus")
    s = RefinedSet.from_cell(g, 0, refine=2)
    assert s.measure() == Fraction(1, 4)
    assert s.popcount() == 16
    full = RefinedSet.full(g.refined(2))
    empty = RefinedSet.empty(g.refined(2))
    assert full.measure() == 1
    assert empty.measure() == 0
    assert s.union(s.complement()) == full
    assert s.intersection(s.complement()) == empty


def test_refined_set_symdiff_exact():
    g = DyadicGrid(2, 1, "torus")
    a = RefinedSet.from_cell(g, 0, refine=1)
    b = RefinedSet.from_cell(g, 1, refine=1)
    assert a.symdiff_measure(b) == Fraction(1, 2)
    assert a.symdiff_measure(a) == 0
    assert a.symdiff(b).measure() == Fraction(1, 2)


def test_refined_set_mismatch():
    a = RefinedSet.full(DyadicGrid(2, 2, "torus"))
    b = RefinedSet.full(DyadicGrid(2, 3, "torus"))
    with pytest.raises(GridMismatch):
        a.union(b)


def test_coarse_fine_roundtrip():
    g = DyadicGrid(2, 2, "torus")
    for idx in range(g.q):
        fine = fine_cells_of_coarse_cell(g, idx, refine=2)
        assert len(fine) == 16
        back = coarse_index_of_fine(g, 2, fine)
        assert np.all(back == idx)
    # all fine cells together partition the fine grid
    allfine = np.concatenate(
        [fine_cells_of_coarse_cell(g, i, 2) for i in range(g.q)])
    assert sorted(allfine) == list(range(g.refined(2).q))


def test_refined_grid():
    g = DyadicGrid(2, 2, "torus")
    f = g.refined(3)
    assert f.order == 5
    assert f.dim == 2
    assert f.topology == "torus"
    assert g.refined(0) == g
