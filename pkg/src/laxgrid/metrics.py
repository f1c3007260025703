"""Strong/weak distances between maps and cell permutations, and the
image-difference functional that drives approximation-speed profiling.

The delta functional sums, over the cells of a grid, the measure of the
symmetric difference between the true image f(C_i) and the permutation image
f_k(C_i), both realized on a refinement of the grid: true images transport
each refined sub-cell by its midpoint, permutation images are exact.  Every
refined estimate carries the declared tolerance eps(r) = q*n*2^-r.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import DomainError, GridMismatch
from .grid import DyadicGrid, coarse_index_of_fine, fine_cells_of_coarse_cell
from .lax import CellPermutation, lax_approximate


def _check_perm_grid(a: CellPermutation, b: CellPermutation, grid: DyadicGrid):
    if a.q != grid.q or b.q != grid.q:
        raise GridMismatch(
            f"permutations of sizes {a.q}, {b.q} against a grid with {grid.q} cells"
        )


def d_strong_bound(a: CellPermutation, b: CellPermutation, grid: DyadicGrid) -> float:
    """Upper bound for the sup-distance between the two cell-translation
    automorphisms: max over cells of image-center distance, plus one cell
    diameter of padding."""
    _check_perm_grid(a, b, grid)
    centers = grid.centers()
    gap = grid.dist(centers[a.image], centers[b.image])
    return float(gap.max(initial=0.0)) + grid.cell_diameter()


def _weak_scan(values, weight_den=None):
    """inf of alpha such that (#values > alpha)/N < alpha, for equal-weight
    values; exact scan of the sorted list.

    Allowing the top k values to exceed alpha forces alpha >= both k/N and
    the (k+1)-th largest value; the infimum is the best such k.
    """
    v = np.sort(np.asarray(values, dtype=float))
    n = len(v)
    den = n if weight_den is None else weight_den
    if n == 0:
        return 0.0
    candidates = np.maximum(np.arange(n) / den, v[::-1])
    return float(min(candidates.min(), n / den))


def d_weak(a: CellPermutation, b: CellPermutation, grid: DyadicGrid) -> float:
    """Weak distance between two cell permutations: the infimum alpha with
    mu{cells moved apart by more than alpha} < alpha, on exact image-center
    displacements."""
    _check_perm_grid(a, b, grid)
    centers = grid.centers()
    gap = grid.dist(centers[a.image], centers[b.image])
    return _weak_scan(gap)


def d_weak_map(f, sigma: CellPermutation, grid: DyadicGrid, refine: int = 3) -> float:
    """Weak distance between a map and a cell permutation, evaluated on the
    refined grid: per fine cell, the distance between the pushed midpoint and
    the permutation-translated midpoint, padded by one fine-cell diameter.
    The padding makes this an over-estimate, which is the safe direction."""
    if sigma.q != grid.q:
        raise GridMismatch(f"permutation of size {sigma.q} on a grid with {grid.q} cells")
    fine = grid.refined(refine)
    mids = fine.centers()
    src = coarse_index_of_fine(grid, refine, np.arange(fine.q))
    lowers = grid.all_multi_indices().astype(float) / grid.side
    shift = lowers[sigma.image[src]] - lowers[src]
    translated = mids + shift
    if grid.topology == "torus":
        translated = np.mod(translated, 1.0)
    gap = grid.dist(f(mids), translated) + fine.cell_diameter()
    return _weak_scan(gap)


# -- image-difference functional ----------------------------------------------


def _transported_fine_sets(point_images, grid: DyadicGrid, refine: int):
    """Per coarse cell, the sorted unique fine-cell indices hit by the pushed
    fine midpoints; point_images given in fine flat order."""
    fine = grid.refined(refine)
    dest = fine.cell_of_points(point_images)
    src = coarse_index_of_fine(grid, refine, np.arange(fine.q))
    order = np.argsort(src, kind="stable")
    per = 1 << (refine * grid.dim)
    groups = dest[order].reshape(grid.q, per)
    return [np.unique(g) for g in groups]


def _sym_diff_count(a: np.ndarray, b: np.ndarray) -> int:
    """|A Δ B| for sorted unique index arrays."""
    common = np.intersect1d(a, b, assume_unique=True).size
    return int(a.size + b.size - 2 * common)


def delta_sum(f, f_k: CellPermutation, grid: DyadicGrid, refine: int = 3) -> Fraction:
    """Sum over cells of the refined-measure symmetric difference between the
    map image and the permutation image of the cell.  Exact rational for the
    transported fine sets; the midpoint transport itself is accurate up to
    eps(r) = q*n*2^-r."""
    return delta_sum_iterate(f, f_k, 1, grid, refine)


def delta_sum_iterate(
    f, f_k: CellPermutation, p: int, grid: DyadicGrid, refine: int = 3
) -> Fraction:
    """Same functional on the p-th iterates: sum_i mu(f^p(C_i) Δ f_k^p(C_i))."""
    if p < 1:
        raise DomainError(f"iterate count must be >= 1, got {p}")
    if f_k.q != grid.q:
        raise GridMismatch(f"permutation of size {f_k.q} on a grid with {grid.q} cells")
    fine = grid.refined(refine)
    images = f.iterate(fine.centers(), p)
    fine_sets = _transported_fine_sets(images, grid, refine)
    target = f_k.power(p).image
    total = 0
    for i in range(grid.q):
        b = fine_cells_of_coarse_cell(grid, int(target[i]), refine)
        total += _sym_diff_count(fine_sets[i], b)
    return Fraction(total, fine.q)


def epsilon_tolerance(grid: DyadicGrid, refine: int) -> float:
    """Declared transport tolerance accompanying refined estimates."""
    return grid.q * grid.dim * 2.0 ** (-refine)


# -- speed profiling -------------------------------------------------------------


_THETA_FAMILIES = ("q", "q2", "qlog2", "table")


class ThetaSpec:
    """Named decreasing target-speed function of q.

    Families: c/q, c/q^2, c/(q log^2 q) (natural log, q >= 2), or an explicit
    table {q: value}.  Values must be positive and nonincreasing in q.
    """

    __slots__ = ("family", "c", "table", "text")

    def __init__(self, family, c=1.0, table=None, text=None):
        if family not in _THETA_FAMILIES:
            raise DomainError(f"unknown theta family {family!r}")
        if family == "table":
            if not table:
                raise DomainError("table theta needs at least one entry")
            qs = sorted(table)
            vals = [table[k] for k in qs]
            if any(v <= 0 for v in vals):
                raise DomainError("theta values must be positive")
            if any(b > a for a, b in zip(vals, vals[1:])):
                raise DomainError("theta table must be nonincreasing in q")
        elif c <= 0:
            raise DomainError(f"theta scale must be positive, got {c}")
        self.family = family
        self.c = float(c)
        self.table = dict(table) if table else None
        self.text = text

    def __call__(self, q: int) -> float:
        if self.family == "q":
            return self.c / q
        if self.family == "q2":
            return self.c / (q * q)
        if self.family == "qlog2":
            if q < 2:
                raise DomainError("c/(q log^2 q) needs q >= 2")
            return self.c / (q * math.log(q) ** 2)
        if q not in self.table:
            raise DomainError(f"theta table has no entry for q={q}")
        return self.table[q]

    def describe(self) -> str:
        if self.text is not None:
            return self.text
        if self.family == "table":
            return "table:" + ",".join(f"{k}={v!r}" for k, v in sorted(self.table.items()))
        return f"{self.c!r}/{self.family}"

    def __repr__(self):
        return f"ThetaSpec({self.describe()!r})"


def parse_theta(text: str) -> ThetaSpec:
    """Parse a theta spec: "1/q", "0.5/q2", "2/qlog2", or
    "table:4=0.5,16=0.25"."""
    s = text.strip()
    if s.startswith("table:"):
        table = {}
        for item in s[len("table:") :].split(","):
            k, _, v = item.partition("=")
            try:
                table[int(k)] = float(v)
            except ValueError as e:
                raise DomainError(f"bad theta table entry {item!r}") from e
        return ThetaSpec("table", table=table, text=s)
    c_text, _, family = s.partition("/")
    try:
        c = float(c_text)
    except ValueError as e:
        raise DomainError(f"bad theta scale in {text!r}") from e
    if family not in ("q", "q2", "qlog2"):
        raise DomainError(f"unknown theta family in {text!r}")
    return ThetaSpec(family, c=c, text=s)


class ApproxRecord:
    """One row of a speed profile: the approximation quality at one order."""

    __slots__ = ("order", "q", "mode", "delta_sum", "d_weak", "d_strong_bound", "theta", "passed")

    def __init__(self, order, q, mode, delta_sum, d_weak, d_strong_bound, theta, passed):
        self.order = order
        self.q = q
        self.mode = mode
        self.delta_sum = delta_sum
        self.d_weak = d_weak
        self.d_strong_bound = d_strong_bound
        self.theta = theta
        self.passed = passed

    def to_json_dict(self):
        return {
            "order": self.order,
            "q": self.q,
            "mode": self.mode,
            "delta_sum": float(self.delta_sum),
            "d_weak": self.d_weak,
            "d_strong_bound": self.d_strong_bound,
            "theta": self.theta,
            "pass": self.passed,
        }

    def __repr__(self):
        return (
            f"ApproxRecord(order={self.order}, q={self.q}, "
            f"delta_sum={float(self.delta_sum):.6g}, pass={self.passed})"
        )


def speed_profile(
    map_,
    orders,
    mode: str = "cyclic",
    theta: ThetaSpec | None = None,
    dim: int = 2,
    topology: str = "torus",
    sampling: int = 8,
    refine: int = 3,
):
    """Run the approximation pipeline across grid orders and score each
    order's delta_sum against the target speed theta(q)."""
    orders = list(orders)
    if any(b <= a for a, b in zip(orders, orders[1:])):
        raise DomainError(f"orders must be strictly increasing, got {orders}")
    if theta is None:
        theta = ThetaSpec("q")
    records = []
    for m in orders:
        grid = DyadicGrid(dim, m, topology)
        perm, cert = lax_approximate(map_, grid, sampling, mode)
        ds = delta_sum(map_, perm, grid, refine)
        dw = d_weak_map(map_, perm, grid, refine)
        target = theta(grid.q)
        records.append(
            ApproxRecord(
                order=m,
                q=grid.q,
                mode=mode,
                delta_sum=ds,
                d_weak=dw,
                d_strong_bound=cert.strong_bound,
                theta=target,
                passed=bool(ds <= target),
            )
        )
    return records
