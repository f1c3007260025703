"""Dyadic grids on the unit cube/torus and exact bit-vector set arithmetic.

A grid of dimension n and order m splits [0,1]^n into q = 2^(n*m) congruent
cells of side 2^-m.  Cells are indexed row-major over their integer corner
multi-indices (last axis fastest).  A RefinedSet stores a measurable set as a
bitmask over the cells of a finer grid, so set arithmetic and measures are
exact rationals with denominator a power of two.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityExceeded, GridMismatch, NoCycle

# Bit budget for refined sets: 2^24 fine cells is 2 MiB per set, plenty for
# every desk-scale experiment while keeping joined partitions affordable.
MAX_FINE_CELLS = 1 << 24

CUBE = "cube"
TORUS = "torus"


class DyadicGrid:
    """Subdivision of [0,1]^n into 2^(n*m) cells of side 2^-m.

    topology "cube" uses the euclidean metric, "torus" the quotient metric
    (per-axis displacement folded into [0, 1/2]).
    """

    __slots__ = ("dim", "order", "topology")

    def __init__(self, dim: int, order: int, topology: str = TORUS):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        if order < 0:
            raise ValueError(f"order must be >= 0, got {order}")
        if topology not in (CUBE, TORUS):
            raise ValueError(f"topology must be 'cube' or 'torus', got {topology!r}")
        if dim * order > MAX_FINE_CELLS.bit_length() - 1:
            raise CapacityExceeded(
                f"2^{dim * order} cells exceed the configured budget of {MAX_FINE_CELLS}"
            )
        self.dim = dim
        self.order = order
        self.topology = topology

    # -- counting ---------------------------------------------------------

    @property
    def side(self) -> int:
        return 1 << self.order

    @property
    def q(self) -> int:
        return 1 << (self.dim * self.order)

    @property
    def cell_measure(self) -> Fraction:
        return Fraction(1, self.q)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DyadicGrid)
            and self.dim == other.dim
            and self.order == other.order
            and self.topology == other.topology
        )

    def __hash__(self):
        return hash((self.dim, self.order, self.topology))

    def __repr__(self):
        return f"DyadicGrid(dim={self.dim}, order={self.order}, topology={self.topology!r})"

    def refined(self, extra: int) -> "DyadicGrid":
        return DyadicGrid(self.dim, self.order + extra, self.topology)

    def to_json_dict(self) -> dict:
        return {"dim": self.dim, "order": self.order, "topology": self.topology}

    # -- indexing ---------------------------------------------------------

    def multi_index(self, idx: int) -> tuple:
        """Integer corner multi-index (k_1, ..., k_n) of a flat cell index."""
        if not 0 <= idx < self.q:
            raise IndexError(f"cell index {idx} out of range [0, {self.q})")
        side = self.side
        out = []
        for _ in range(self.dim):
            out.append(idx % side)
            idx //= side
        return tuple(reversed(out))

    def flat_index(self, multi: Sequence[int]) -> int:
        side = self.side
        idx = 0
        for k in multi:
            if not 0 <= k < side:
                raise IndexError(f"multi-index component {k} out of range [0, {side})")
            idx = idx * side + k
        return idx

    def all_multi_indices(self) -> np.ndarray:
        """(q, n) int array of corner multi-indices, in flat-index order."""
        side = self.side
        axes = [np.arange(side)] * self.dim
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    # -- geometry ---------------------------------------------------------

    def cell_center(self, idx: int) -> np.ndarray:
        k = np.array(self.multi_index(idx), dtype=float)
        return (k + 0.5) / self.side

    def centers(self) -> np.ndarray:
        """(q, n) array of all cell centers in flat-index order."""
        return (self.all_multi_indices() + 0.5) / self.side

    def cell_lower(self, idx: int) -> np.ndarray:
        return np.array(self.multi_index(idx), dtype=float) / self.side

    def cell_diameter(self) -> float:
        """Diameter of one cell under the grid's metric (same for all cells)."""
        extent = min(1.0 / self.side, 0.5) if self.topology == TORUS else 1.0 / self.side
        return math.sqrt(self.dim) * extent

    def cell_geometry(self, idx: int):
        """(center, diameter) of a cell."""
        return self.cell_center(idx), self.cell_diameter()

    def cell_of_points(self, pts: np.ndarray) -> np.ndarray:
        """Flat cell index for each point; (N, n) -> (N,).

        Torus points are wrapped, cube points on the upper boundary are
        assigned to the last cell along that axis.
        """
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        side = self.side
        if self.topology == TORUS:
            pts = np.mod(pts, 1.0)
        k = np.floor(pts * side).astype(np.int64)
        np.clip(k, 0, side - 1, out=k)
        flat = k[:, 0]
        for a in range(1, self.dim):
            flat = flat * side + k[:, a]
        return flat

    def dist(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Pointwise distance under the grid metric; broadcasts over leading axes."""
        d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
        if self.topology == TORUS:
            d = np.minimum(d, 1.0 - d)
        return np.sqrt(np.sum(d * d, axis=-1))

    def face_adjacent(self, i: int, j: int) -> bool:
        """True iff cells i and j share an (n-1)-face."""
        a = self.multi_index(i)
        b = self.multi_index(j)
        side = self.side
        diff = 0
        for u, v in zip(a, b):
            step = abs(u - v)
            if self.topology == TORUS:
                step = min(step, side - step)
            if step == 0:
                continue
            if step != 1:
                return False
            diff += 1
        return diff == 1


# -- snake orderings ------------------------------------------------------


def _snake_path(side: int, ndim: int):
    """Boustrophedon Hamiltonian path over [0,side)^ndim (consecutive face-adjacent)."""
    if ndim == 1:
        return [(k,) for k in range(side)]
    prev = _snake_path(side, ndim - 1)
    out = []
    for i, p in enumerate(prev):
        rng = range(side) if i % 2 == 0 else range(side - 1, -1, -1)
        out.extend(p + (k,) for k in rng)
    return out


def snake_order(grid: DyadicGrid) -> tuple:
    """Hamiltonian cell cycle: consecutive cells face-adjacent, wraparound included.

    Built from a boustrophedon path over the first n-1 axes with a level sweep
    over the last axis and a return lane at level 0 (the classic comb), then
    rotated to start at cell 0.  Deterministic.

    Raises NoCycle for n=1 cube grids with more than two cells, where the cell
    adjacency graph is a path and admits no Hamiltonian cycle.
    """
    side = grid.side
    if grid.q == 1:
        return (0,)
    if grid.dim == 1:
        if side == 2 or grid.topology == TORUS:
            return tuple(range(side))
        raise NoCycle(f"n=1 cube grid with {side} cells has no Hamiltonian cell cycle")
    base = _snake_path(side, grid.dim - 1)
    cyc = []
    for i, p in enumerate(base):
        levels = range(1, side) if i % 2 == 0 else range(side - 1, 0, -1)
        cyc.extend(p + (l,) for l in levels)
    cyc.extend(p + (0,) for p in reversed(base))
    flat = [grid.flat_index(m) for m in cyc]
    start = flat.index(0)
    flat = flat[start:] + flat[:start]
    return tuple(flat)


# -- refined sets ----------------------------------------------------------


class RefinedSet:
    """Subset of the cube as a bitmask over the cells of a finer dyadic grid.

    bits is a Python int; bit j is fine cell j of fine_grid (order m + r).
    Measures are exact Fractions with denominator 2^(n*(m+r)).
    """

    __slots__ = ("fine_grid", "base_order", "bits")

    def __init__(self, fine_grid: DyadicGrid, bits: int, base_order: int | None = None):
        if fine_grid.q > MAX_FINE_CELLS:
            raise CapacityExceeded(
                f"{fine_grid.q} fine cells exceed the budget of {MAX_FINE_CELLS}"
            )
        self.fine_grid = fine_grid
        self.base_order = fine_grid.order if base_order is None else base_order
        self.bits = bits

    # -- constructors -----------------------------------------------------

    @classmethod
    def empty(cls, fine_grid: DyadicGrid, base_order: int | None = None) -> "RefinedSet":
        return cls(fine_grid, 0, base_order)

    @classmethod
    def full(cls, fine_grid: DyadicGrid, base_order: int | None = None) -> "RefinedSet":
        return cls(fine_grid, (1 << fine_grid.q) - 1, base_order)

    @classmethod
    def from_fine_indices(
        cls,
        fine_grid: DyadicGrid,
        indices: Iterable[int],
        base_order: int | None = None,
    ) -> "RefinedSet":
        bits = 0
        for j in indices:
            bits |= 1 << int(j)
        return cls(fine_grid, bits, base_order)

    @classmethod
    def from_cell(cls, grid: DyadicGrid, idx: int, refine: int) -> "RefinedSet":
        """The coarse cell idx of grid, represented on the grid refined by 2^refine."""
        fine = grid.refined(refine)
        return cls.from_fine_indices(
            fine, fine_cells_of_coarse_cell(grid, idx, refine), base_order=grid.order
        )

    @classmethod
    def from_bool_array(
        cls, fine_grid: DyadicGrid, mask: np.ndarray, base_order: int | None = None
    ) -> "RefinedSet":
        packed = np.packbits(mask.astype(np.uint8), bitorder="little")
        return cls(fine_grid, int.from_bytes(packed.tobytes(), "little"), base_order)

    # -- views -------------------------------------------------------------

    @property
    def refine(self) -> int:
        return self.fine_grid.order - self.base_order

    def popcount(self) -> int:
        return self.bits.bit_count()

    def measure(self) -> Fraction:
        return Fraction(self.popcount(), self.fine_grid.q)

    def to_bool_array(self) -> np.ndarray:
        q = self.fine_grid.q
        nbytes = (q + 7) // 8
        raw = np.frombuffer(self.bits.to_bytes(nbytes, "little"), dtype=np.uint8)
        return np.unpackbits(raw, count=q, bitorder="little").astype(bool)

    def fine_indices(self) -> np.ndarray:
        return np.nonzero(self.to_bool_array())[0]

    def __contains__(self, fine_idx: int) -> bool:
        return bool((self.bits >> int(fine_idx)) & 1)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RefinedSet)
            and self.fine_grid == other.fine_grid
            and self.bits == other.bits
        )

    def __hash__(self):
        return hash((self.fine_grid, self.bits))

    def __repr__(self):
        return (
            f"RefinedSet(order={self.base_order}+{self.refine}, "
            f"measure={self.measure()})"
        )

    # -- set algebra --------------------------------------------------------

    def _check(self, other: "RefinedSet"):
        if (
            self.fine_grid.dim != other.fine_grid.dim
            or self.fine_grid.order != other.fine_grid.order
        ):
            raise GridMismatch(
                f"operands on different fine grids: {self.fine_grid} vs {other.fine_grid}"
            )

    def union(self, other: "RefinedSet") -> "RefinedSet":
        self._check(other)
        return RefinedSet(self.fine_grid, self.bits | other.bits, self.base_order)

    def intersection(self, other: "RefinedSet") -> "RefinedSet":
        self._check(other)
        return RefinedSet(self.fine_grid, self.bits & other.bits, self.base_order)

    def symdiff(self, other: "RefinedSet") -> "RefinedSet":
        self._check(other)
        return RefinedSet(self.fine_grid, self.bits ^ other.bits, self.base_order)

    def complement(self) -> "RefinedSet":
        mask = (1 << self.fine_grid.q) - 1
        return RefinedSet(self.fine_grid, self.bits ^ mask, self.base_order)

    __or__ = union
    __and__ = intersection
    __xor__ = symdiff

    def symdiff_measure(self, other: "RefinedSet") -> Fraction:
        self._check(other)
        return Fraction((self.bits ^ other.bits).bit_count(), self.fine_grid.q)


def set_ops(a: RefinedSet, b: RefinedSet) -> dict:
    """Union, intersection, symmetric difference and the symdiff measure of a, b."""
    return {
        "union": a.union(b),
        "intersection": a.intersection(b),
        "symdiff": a.symdiff(b),
        "measure": a.symdiff_measure(b),
    }


def fine_cells_of_coarse_cell(grid: DyadicGrid, idx: int, refine: int) -> np.ndarray:
    """Flat fine-grid indices (order+refine) of the fine cells inside coarse cell idx."""
    sub = 1 << refine
    fine_side = grid.side * sub
    corner = np.array(grid.multi_index(idx), dtype=np.int64) * sub
    axes = [corner[a] + np.arange(sub) for a in range(grid.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = mesh[0].ravel()
    for a in range(1, grid.dim):
        flat = flat * fine_side + mesh[a].ravel()
    if grid.dim == 1:
        flat = flat.copy()
    return flat


def coarse_index_of_fine(grid: DyadicGrid, refine: int, fine_idx: np.ndarray) -> np.ndarray:
    """Coarse cell index containing each fine cell of the grid refined by `refine`."""
    fine_idx = np.asarray(fine_idx, dtype=np.int64)
    sub = 1 << refine
    fine_side = grid.side * sub
    rem = fine_idx
    coarse = np.zeros_like(fine_idx)
    for a in range(grid.dim - 1, -1, -1):
        k = rem % fine_side
        rem = rem // fine_side
        coarse += (k // sub) * (grid.side ** (grid.dim - 1 - a))
    return coarse
