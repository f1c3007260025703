"""Tower combinatorics for cell permutations and the rank-one base set.

Rokhlin towers become exact per-cycle block layouts: a base set whose first
m iterates are pairwise disjoint, with coverage computable in integers.  The
coprime two-column variant tiles every cycle completely with blocks of two
coprime heights via a Bezout split of the cycle length.  The rank-one base
intersects the pullbacks of a starting cell along a cyclic approximation and
certifies how close the resulting tower is to the dyadic partition.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd

import numpy as np

from .errors import (
    CycleTooShort,
    DomainError,
    EqualSizeInfeasible,
    NotCoprime,
    NotCyclic,
    TooSmall,
)
from .grid import DyadicGrid, RefinedSet, fine_cells_of_coarse_cell
from .lax import CellPermutation


def bezout_split(k: int, p: int, qp: int):
    """Write k = alpha*p + beta*qp with alpha, beta >= 0, gcd(p, qp) = 1 and
    k >= p*qp; alpha is the unique solution in [0, qp)."""
    if gcd(p, qp) != 1:
        raise NotCoprime(f"heights {p} and {qp} are not coprime")
    if k < p * qp:
        raise TooSmall(f"need k >= p*q' = {p * qp}, got {k}")
    alpha = (k * pow(p, -1, qp)) % qp
    beta = (k - alpha * p) // qp
    return int(alpha), int(beta)


class Tower:
    """A base set of cells whose first `height` iterates under sigma are
    pairwise disjoint."""

    __slots__ = ("sigma", "base", "height")

    def __init__(self, sigma: CellPermutation, base, height: int):
        self.sigma = sigma
        self.base = sorted(int(b) for b in base)
        self.height = int(height)

    @property
    def q(self):
        return self.sigma.q

    def levels(self):
        """[base, sigma(base), ..., sigma^(height-1)(base)] as index arrays."""
        lvl = np.array(self.base, dtype=np.int64)
        out = []
        for _ in range(self.height):
            out.append(lvl)
            lvl = self.sigma.image[lvl]
        return out

    def coverage(self) -> Fraction:
        return Fraction(self.height * len(self.base), self.q)

    def to_json_dict(self):
        return {
            "base": self.base,
            "height": self.height,
            "coverage": float(self.coverage()),
        }


def rokhlin_tower(sigma: CellPermutation, height: int) -> Tower:
    """Exact tower of the given height: along each cycle, every height-th
    element starting from the cycle's smallest is a base point, floor(L/height)
    of them, so coverage is exactly sum floor(L/h)*h / q >= 1 - (h-1)*#cycles/q.
    """
    if height < 1:
        raise DomainError(f"height must be >= 1, got {height}")
    base = []
    for cyc in sigma.cycles:
        L = len(cyc)
        if L < height:
            raise CycleTooShort(
                f"cycle of length {L} is shorter than the tower height {height}"
            )
        base.extend(cyc[j * height] for j in range(L // height))
    return Tower(sigma, base, height)


class TwoColumnTower:
    """Two column families of coprime heights p, q' tiling the ground set."""

    __slots__ = ("sigma", "t1", "t2", "p", "qp")

    def __init__(self, sigma, t1, t2, p, qp):
        self.sigma = sigma
        self.t1 = sorted(int(b) for b in t1)
        self.t2 = sorted(int(b) for b in t2)
        self.p = int(p)
        self.qp = int(qp)

    @property
    def q(self):
        return self.sigma.q

    def all_levels(self):
        """Every cell of every column, as (cell, column, level) triples."""
        img = self.sigma.image
        out = []
        for col, (bases, h) in enumerate(((self.t1, self.p), (self.t2, self.qp)), 1):
            for b in bases:
                j = b
                for lvl in range(h):
                    out.append((int(j), col, lvl))
                    j = img[j]
        return out

    def is_exact_partition(self) -> bool:
        cells = [c for c, _, _ in self.all_levels()]
        return len(cells) == self.q and len(set(cells)) == self.q

    def to_json_dict(self):
        return {
            "t1": {"base": self.t1, "height": self.p},
            "t2": {"base": self.t2, "height": self.qp},
            "coverage": 1.0,
        }


def _layout_cycle(cyc, p, qp, alpha, beta):
    """Base positions of alpha height-p blocks then beta height-qp blocks
    along the cycle, starting at its smallest element."""
    t1 = [cyc[j * p] for j in range(alpha)]
    off = alpha * p
    t2 = [cyc[off + j * qp] for j in range(beta)]
    return t1, t2


def two_column_partition(
    sigma: CellPermutation, p: int, qp: int, equal_sizes: bool = False
) -> TwoColumnTower:
    """Tile every cycle of sigma with blocks of heights p and q' (coprime),
    all height-p blocks first, so the columns partition the ground set
    exactly.  With equal_sizes=True the block counts are rebalanced so both
    columns have the same number of bases, when the integer system allows it.
    """
    splits = []
    for cyc in sigma.cycles:
        try:
            splits.append(bezout_split(len(cyc), p, qp))
        except TooSmall as e:
            raise CycleTooShort(str(e)) from e
    if equal_sizes:
        splits = _rebalance_equal(sigma, splits, p, qp)
    t1, t2 = [], []
    for cyc, (alpha, beta) in zip(sigma.cycles, splits):
        b1, b2 = _layout_cycle(cyc, p, qp, alpha, beta)
        t1.extend(b1)
        t2.extend(b2)
    return TwoColumnTower(sigma, t1, t2, p, qp)


def _rebalance_equal(sigma, splits, p, qp):
    """Shift per-cycle Bezout splits (alpha + q', beta - p steps) until both
    columns hold q/(p+q') bases each; EqualSizeInfeasible when impossible."""
    q = sigma.q
    if q % (p + qp) != 0:
        raise EqualSizeInfeasible(
            f"q = {q} is not divisible by p + q' = {p + qp}; equal base sizes "
            "have no integer solution"
        )
    x = q // (p + qp)
    total_alpha = sum(a for a, _ in splits)
    need = x - total_alpha
    if need % qp != 0:
        raise EqualSizeInfeasible("no per-cycle shift reaches equal base sizes")
    shifts = need // qp
    out = list(splits)
    if shifts >= 0:
        for i, (a, b) in enumerate(out):
            take = min(shifts, b // p)
            out[i] = (a + take * qp, b - take * p)
            shifts -= take
            if shifts == 0:
                break
    else:
        shifts = -shifts
        for i, (a, b) in enumerate(out):
            take = min(shifts, a // qp)
            out[i] = (a - take * qp, b + take * p)
            shifts -= take
            if shifts == 0:
                break
    if shifts != 0 or sum(a for a, _ in out) != x:
        raise EqualSizeInfeasible("no per-cycle shift reaches equal base sizes")
    return out


# -- rank-one base ---------------------------------------------------------------


class RankOneCertificate:
    """What survives of a cell under a cyclic approximation.

    A is the refined subset of the start cell whose forward orbit tracks the
    permutation's cell orbit for a full period tau = q.  disjointness_ok
    certifies that A, f(A), ..., f^(tau-1)(A) are pairwise disjoint at the
    refined resolution; return_overlap is tau * mu(A ∩ f^tau(A));
    partition_error[k] is mu(C_k Δ f^(i_k)(A)) for the tower level i_k
    visiting coarse cell k.
    """

    __slots__ = (
        "A",
        "tau",
        "mu_A",
        "mu_C",
        "disjointness_ok",
        "return_overlap",
        "partition_error",
        "start_cell",
    )

    def __init__(
        self, A, tau, mu_A, mu_C, disjointness_ok, return_overlap, partition_error, start_cell
    ):
        self.A = A
        self.tau = tau
        self.mu_A = mu_A
        self.mu_C = mu_C
        self.disjointness_ok = disjointness_ok
        self.return_overlap = return_overlap
        self.partition_error = partition_error
        self.start_cell = start_cell

    def base_deficit(self) -> Fraction:
        """mu(C) - mu(A), the quantity the approximation quality bounds."""
        return self.mu_C - self.mu_A

    def to_json_dict(self):
        return {
            "start_cell": self.start_cell,
            "tau": self.tau,
            "mu_A": float(self.mu_A),
            "mu_C": float(self.mu_C),
            "disjointness_ok": bool(self.disjointness_ok),
            "return_overlap": float(self.return_overlap),
            "partition_error_max": float(max(self.partition_error)),
        }


def rank_one_base(
    f,
    f_m: CellPermutation,
    grid: DyadicGrid,
    refine: int = 3,
    start_cell: int = 0,
) -> RankOneCertificate:
    """Intersect the pullbacks of a starting cell along a cyclic cell
    approximation, at refined resolution.

    A = {refined sub-cells x of C : f^i(mid x) lands in f_m^i(C) for all
    i < q}, computed by pushing midpoints forward.  Also certifies level
    disjointness, the period-q return overlap, and per-cell reconstruction
    errors of the dyadic partition by the tower levels f^i(A).
    """
    if not f_m.is_cyclic():
        raise NotCyclic(
            f"need a single q-cycle, got cycle lengths {f_m.cycle_lengths()}"
        )
    q = grid.q
    fine = grid.refined(refine)
    cell_fine = fine_cells_of_coarse_cell(grid, start_cell, refine)
    pts = fine.centers()[cell_fine]
    alive = np.ones(len(pts), dtype=bool)
    orbit_cell = start_cell
    cur = pts
    for _ in range(q - 1):
        cur = f(cur)
        orbit_cell = int(f_m.image[orbit_cell])
        inside = grid.cell_of_points(cur) == orbit_cell
        alive &= inside
    A_fine = cell_fine[alive]
    A = RefinedSet.from_fine_indices(fine, A_fine, base_order=grid.order)
    mu_A = Fraction(len(A_fine), fine.q)
    mu_C = Fraction(1, q)

    # forward images of A's midpoints: disjointness, partition errors, return
    seen = np.zeros(fine.q, dtype=bool)
    disjoint = True
    level_sets = []
    apts = pts[alive]
    cur = apts
    for i in range(q):
        idx = np.unique(fine.cell_of_points(cur)) if len(cur) else np.empty(0, np.int64)
        level_sets.append(idx)
        if np.any(seen[idx]):
            disjoint = False
        seen[idx] = True
        cur = f(cur) if len(cur) else cur
    return_set = np.unique(fine.cell_of_points(cur)) if len(cur) else np.empty(0, np.int64)
    common = np.intersect1d(A_fine, return_set, assume_unique=False).size
    return_overlap = Fraction(q) * Fraction(int(common), fine.q)

    partition_error = []
    orbit_cell = start_cell
    for i in range(q):
        target = fine_cells_of_coarse_cell(grid, orbit_cell, refine)
        inter = np.intersect1d(level_sets[i], target, assume_unique=True).size
        sym = len(level_sets[i]) + len(target) - 2 * inter
        partition_error.append(Fraction(int(sym), fine.q))
        orbit_cell = int(f_m.image[orbit_cell])
    return RankOneCertificate(
        A=A,
        tau=q,
        mu_A=mu_A,
        mu_C=mu_C,
        disjointness_ok=disjoint,
        return_overlap=return_overlap,
        partition_error=partition_error,
        start_cell=start_cell,
    )
