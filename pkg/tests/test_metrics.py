import numpy as np
import pytest
from fractions import Fraction

from laxgrid import (
    ApproxRecord,
    CellPermutation,
    DyadicGrid,
    cat_map,
    d_strong_bound,
    d_weak,
    d_weak_map,
    delta_sum,
    delta_sum_iterate,
    epsilon_tolerance,
    identity,
    lax_approximate,
    parse_theta,
    speed_profile,
    translation,
)
from laxgrid.errors import ConfigError, DomainError, GridMismatch


def test_d_strong_bound_identity():
    g = DyadicGrid(2, 2, "torus")
    e = CellPermutation.identity(16)
    assert d_strong_bound(e, e, g) == pytest.approx(g.cell_diameter())


def test_d_strong_bound_grows_with_displacement():
    g = DyadicGrid(2, 2, "torus")
    e = CellPermutation.identity(16)
    shifted = translation([0.25, 0.0]).exact_cell_permutation(g)
    b = d_strong_bound(e, CellPermutation(shifted), g)
    assert b == pytest.approx(0.25 + g.cell_diameter())


def test_d_weak_zero_for_equal():
    g = DyadicGrid(2, 2, "torus")
    e = CellPermutation.identity(16)
    assert d_weak(e, e, g) == 0.0


def test_d_weak_scan_semantics():
    # half the cells displaced by 1/2: inf alpha with mu{gap > alpha} < alpha
    g = DyadicGrid(1, 1, "torus")
    a = CellPermutation.identity(2)
    b = CellPermutation([1, 0])
    val = d_weak(a, b, g)
    assert 0.0 < val <= 1.0


def test_d_weak_map_identity_padding():
    # exact identity still pays one fine-cell diameter of padding
    g = DyadicGrid(2, 1, "torus")
    e = CellPermutation.identity(4)
    fine = g.refined(3)
    assert d_weak_map(identity(2), e, g, refine=3) == pytest.approx(
        fine.cell_diameter())


def test_delta_sum_exact_translation_is_zero():
    g = DyadicGrid(2, 2, "torus")
    f = translation([0.25, 0.5])
    perm = CellPermutation(f.exact_cell_permutation(g))
    assert delta_sum(f, perm, g, refine=3) == 0


def test_delta_sum_mismatch():
    g = DyadicGrid(2, 2, "torus")
    with pytest.raises(GridMismatch):
        delta_sum(identity(2), CellPermutation.identity(4), g)


def test_delta_sum_cat_frozen():
    cat = cat_map()
    expected = {1: Fraction(3, 2), 2: Fraction(105, 64), 3: Fraction(397, 256)}
    for m, want in expected.items():
        g = DyadicGrid(2, m, "torus")
        perm, _ = lax_approximate(cat, g, sampling=8, mode="cyclic")
        assert delta_sum(cat, perm, g, refine=3) == want


def test_delta_sum_iterate_matches_single_step():
    g = DyadicGrid(2, 2, "torus")
    cat = cat_map()
    perm, _ = lax_approximate(cat, g, sampling=8, mode="cyclic")
    assert delta_sum_iterate(cat, perm, 1, g, 3) == delta_sum(cat, perm, g, 3)
    with pytest.raises(DomainError):
        delta_sum_iterate(cat, perm, 0, g, 3)


def test_epsilon_tolerance():
    g = DyadicGrid(2, 2, "torus")
    assert epsilon_tolerance(g, 3) == 16 * 2 * 2.0 ** -3
    assert epsilon_tolerance(DyadicGrid(1, 3), 4) == 8 * 1 * 2.0 ** -4


def test_parse_theta():
    t = parse_theta("1.0/q")
    assert t(16) == pytest.approx(1 / 16)
    assert t.describe() == "1.0/q"
    t2 = parse_theta("2.5/q2")
    assert t2(4) == pytest.approx(2.5 / 16)
    t3 = parse_theta("table:4=0.5,16=0.25")
    assert t3(4) == 0.5 and t3(16) == 0.25
    with pytest.raises(DomainError):
        parse_theta("1.0/q3")
    with pytest.raises(DomainError):
        parse_theta("")
    with pytest.raises(DomainError):
        parse_theta("table:x=1")


def test_speed_profile_identity():
    recs = speed_profile(identity(2), [1, 2], mode="plain")
    assert [r.order for r in recs] == [1, 2]
    assert all(r.delta_sum == 0 for r in recs)
    assert all(r.passed for r in recs)
    d = recs[0].to_json_dict()
    assert set(d) == {"order", "q", "mode", "delta_sum", "d_weak",
                      "d_strong_bound", "theta", "pass"}
    assert d["pass"] is True


def test_speed_profile_needs_increasing_orders():
    with pytest.raises(DomainError):
        speed_profile(identity(2), [2, 2])
    with pytest.raises(DomainError):
        speed_profile(identity(2), [3, 1])


def test_speed_profile_records_are_mode_tagged():
    recs = speed_profile(cat_map(), [1], mode="cyclic", refine=2)
    assert recs[0].mode == "cyclic"
    assert recs[0].q == 4
    assert float(recs[0].delta_sum) > 0
