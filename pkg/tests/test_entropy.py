import numpy as np
import pytest
from fractions import Fraction

from laxgrid import (
    Branch,
    CellPermutation,
    DyadicGrid,
    Partition,
    Rect,
    RectModel,
    cat_map,
    entropy_rate_estimate,
    horseshoe_entropy_lower,
    identity,
    join,
    katok_stepin_gap_bound,
    k_baker,
    lax_approximate,
    delta_sum,
    epsilon_tolerance,
    markov_components,
    partition_entropy,
)
from laxgrid.errors import (
    CapacityExceeded,
    DomainError,
    GapTooSmall,
    GridMismatch,
    NotAPartition,
)

LOG2 = float(np.log(2.0))


def quadrants():
    return Partition.cell_partition(DyadicGrid(2, 1, "torus"))


def test_partition_entropy_uniform():
    assert abs(partition_entropy(quadrants()) - np.log(4)) < 1e-12
    g3 = DyadicGrid(2, 3, "torus")
    assert abs(partition_entropy(Partition.cell_partition(g3)) - np.log(64)) < 1e-12


def test_partition_entropy_single_part():
    g = DyadicGrid(2, 1, "torus")
    P = Partition.from_labels(g, np.zeros(4, dtype=int))
    assert partition_entropy(P) == 0.0


def test_partition_entropy_half_quarter_quarter():
    g = DyadicGrid(2, 1, "torus")
    P = Partition.from_labels(g, np.array([0, 0, 1, 2]))
    assert list(P.measures()) == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)]
    assert abs(partition_entropy(P) - 1.5 * LOG2) < 1e-12


def test_partition_validation():
    from laxgrid import RefinedSet

    g = DyadicGrid(2, 1, "torus")
    a = RefinedSet.from_fine_indices(g, [0, 1])
    b = RefinedSet.from_fine_indices(g, [1, 2])
    c = RefinedSet.from_fine_indices(g, [2, 3])
    with pytest.raises(NotAPartition):
        Partition([a, b])  # overlap at cell 1
    with pytest.raises(NotAPartition):
        Partition([a])  # cells 2, 3 uncovered
    with pytest.raises(NotAPartition):
        Partition([])
    assert len(Partition([a, c])) == 2


def test_join_halves_gives_quadrants():
    g = DyadicGrid(2, 1, "torus")
    labels = g.all_multi_indices()
    vertical = Partition.from_labels(g, labels[:, 0])
    horizontal = Partition.from_labels(g, labels[:, 1])
    J = join(vertical, horizontal)
    assert len(J) == 4
    assert abs(partition_entropy(J) - np.log(4)) < 1e-12
    # join with itself and with the trivial partition changes nothing
    assert partition_entropy(join(vertical, vertical)) == pytest.approx(
        partition_entropy(vertical))
    trivial = Partition.from_labels(g, np.zeros(4, dtype=int))
    assert len(join(vertical, trivial)) == len(vertical)


def test_join_grid_mismatch():
    a = Partition.cell_partition(DyadicGrid(2, 1, "torus"))
    b = Partition.cell_partition(DyadicGrid(2, 2, "torus"))
    with pytest.raises(GridMismatch):
        join(a, b)


def test_subadditivity_random():
    g = DyadicGrid(2, 4, "torus")
    rng = np.random.default_rng(11)
    for _ in range(10):
        P = Partition.from_labels(g, rng.integers(0, 5, g.q))
        Q = Partition.from_labels(g, rng.integers(0, 4, g.q))
        hj = partition_entropy(join(P, Q))
        assert hj <= partition_entropy(P) + partition_entropy(Q) + 1e-12
        assert 0.0 <= hj <= np.log(len(join(P, Q))) + 1e-12


def test_entropy_rate_permutation_exact():
    g = DyadicGrid(2, 2, "torus")
    P = Partition.cell_partition(g)
    rng = np.random.default_rng(3)
    for l in (1, 2, 3):
        perm = CellPermutation(rng.permutation(16))
        assert entropy_rate_estimate(perm, P, l) == np.log(16) / l


def test_entropy_rate_identity_map():
    P = quadrants()
    h = partition_entropy(P)
    for l in (1, 2, 4):
        assert entropy_rate_estimate(identity(2), P, l, refine=3) == pytest.approx(
            h / l, abs=1e-12)


def test_entropy_rate_validation():
    P = quadrants()
    with pytest.raises(DomainError):
        entropy_rate_estimate(identity(2), P, 0)
    with pytest.raises(CapacityExceeded):
        # transport resolution 2^(2*14) blows the fine-cell budget
        entropy_rate_estimate(identity(2), quadrants(), 2, refine=13)


def test_entropy_rate_cat_quadrants_frozen():
    # transport at 64x64 stays within 0.15 of log((3+sqrt 5)/2); the 256x256
    # rerun is pinned as a regression reference
    cat = cat_map()
    P = quadrants()
    target = np.log((3 + np.sqrt(5)) / 2)
    r6 = entropy_rate_estimate(cat, P, 8, refine=5)
    assert abs(r6 - target) <= 0.15
    assert r6 == pytest.approx(1.0351516854211875, abs=1e-12)
    r8 = entropy_rate_estimate(cat, P, 8, refine=7)
    assert r8 == pytest.approx(1.1531717467616378, abs=1e-12)


def test_katok_stepin_gap_bound_formula():
    assert katok_stepin_gap_bound(1, 0.0, 4) == 0.0
    assert katok_stepin_gap_bound(1, 1.0, 4) == pytest.approx(np.log(4))
    # -l d log(l d / q^l)
    assert katok_stepin_gap_bound(2, 0.5, 4) == pytest.approx(
        -1.0 * np.log(1.0 / 16))
    with pytest.raises(DomainError):
        katok_stepin_gap_bound(2, -0.1, 4)


def test_katok_stepin_gap_holds_for_cat():
    # entropy surplus of the map over its cyclic approximation stays under
    # the displacement-mass bound, within the declared transport tolerance
    cat = cat_map()
    g = DyadicGrid(2, 2, "torus")
    perm, _ = lax_approximate(cat, g, sampling=8, mode="cyclic")
    ds = float(delta_sum(cat, perm, g, refine=5))
    P = Partition.cell_partition(g)
    eps = epsilon_tolerance(g, 5)
    for l in (1, 2, 3, 4):
        h_f = entropy_rate_estimate(cat, P, l, refine=5) * l
        h_k = entropy_rate_estimate(perm, P, l) * l
        assert h_f - h_k <= katok_stepin_gap_bound(l, ds, g.q) + eps


def test_rect_arithmetic():
    u = Rect.unit()
    assert u.width == 1 and u.height == 1
    r = Rect(Fraction(1, 4), Fraction(3, 4), Fraction(0), Fraction(1, 2))
    assert r.intersect(u) == r
    assert r.intersect(Rect(Fraction(3, 4), Fraction(1), Fraction(0), Fraction(1))).is_empty()


def test_baker_branches_exact():
    m = RectModel.from_baker(2)
    assert len(m.branches) == 2
    b0, b1 = m.branches
    assert b0.map_point(Fraction(1, 4), Fraction(1, 2)) == (Fraction(1, 2), Fraction(1, 4))
    assert b1.map_point(Fraction(3, 4), Fraction(1, 2)) == (Fraction(1, 2), Fraction(3, 4))
    with pytest.raises(DomainError):
        Branch(Rect.unit(), Fraction(2), Fraction(0), Fraction(1), Fraction(0))


def test_model_composition_counts_branches():
    m = RectModel.from_baker(2)
    assert len(m.then(m).branches) == 4
    assert len(m.power(3).branches) == 8
    assert len(RectModel.identity_model().branches) == 1


def test_markov_components_frozen():
    unit = Rect.unit()
    assert markov_components(RectModel.from_baker(2), unit, unit) == 2
    assert markov_components(RectModel.from_baker(3), unit, unit) == 3
    # identity has no strict crossing of nested rectangles
    inner = Rect(Fraction(1, 4), Fraction(3, 4), Fraction(1, 4), Fraction(3, 4))
    assert markov_components(RectModel.identity_model(), inner, inner) == 0
    b3 = RectModel.from_baker(3)
    assert markov_components(b3.then(b3), unit, unit) == 9


def test_markov_composition_law():
    unit = Rect.unit()
    for k in (2, 3):
        model = RectModel.from_baker(k)
        for l in (1, 2, 3, 4):
            count = markov_components(model.power(l), unit, unit)
            assert isinstance(count, int)
            assert count >= k ** l


def test_horseshoe_lower_bounds():
    assert horseshoe_entropy_lower(RectModel.from_baker(2), 10) >= LOG2 - 1e-9
    assert horseshoe_entropy_lower(RectModel.from_baker(3), 8) >= np.log(3) - 1e-9
    assert horseshoe_entropy_lower(RectModel.identity_model(), 5) == 0.0


def test_horseshoe_gap_validation():
    m = RectModel.from_baker(2)
    with pytest.raises(GapTooSmall):
        horseshoe_entropy_lower(m, 4, eps=0.9)
    with pytest.raises(DomainError):
        horseshoe_entropy_lower(m, 0)
