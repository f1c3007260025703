"""Partition entropy, joint refinements under dynamics, and horseshoe
entropy bounds for piecewise-affine rectangle models.

Partitions are lists of exact refined sets; joins and pullback joints work
on per-fine-cell label arrays, so a partition of a 2^20-cell refinement
joins in milliseconds.  Rectangle models keep every coordinate a Fraction,
making branch images, compositions and Markov-crossing counts exact integer
combinatorics; entropy lower bounds then come from counting itineraries
through crossing components.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import (
    DomainError,
    GapTooSmall,
    GridMismatch,
    NotAPartition,
    UnsupportedGeometry,
)
from .grid import DyadicGrid, RefinedSet, coarse_index_of_fine
from .lax import CellPermutation
from .maps import MeasureMap

LOG_HALF = math.log(0.5)


class Partition:
    """Finite measurable partition as refined sets on one fine grid."""

    __slots__ = ("fine_grid", "parts", "_labels")

    def __init__(self, parts, _labels=None):
        parts = list(parts)
        if not parts:
            raise NotAPartition("a partition needs at least one part")
        fine = parts[0].fine_grid
        if any(p.fine_grid != fine for p in parts):
            raise NotAPartition("parts live on different fine grids")
        if _labels is None:
            total = sum(p.popcount() for p in parts)
            union = 0
            for p in parts:
                union |= p.bits
            if total != fine.q or union != (1 << fine.q) - 1:
                raise NotAPartition(
                    "parts must tile the space exactly at the refined resolution"
                )
        self.fine_grid = fine
        self.parts = parts
        self._labels = _labels

    @classmethod
    def cell_partition(cls, grid: DyadicGrid, refine: int = 0) -> "Partition":
        """One part per cell of the grid, at the given extra resolution."""
        fine = grid.refined(refine)
        labels = coarse_index_of_fine(grid, refine, np.arange(fine.q))
        return cls.from_labels(fine, labels, base_order=grid.order)

    @classmethod
    def from_labels(cls, fine_grid: DyadicGrid, labels, base_order=None) -> "Partition":
        """Partition from a per-fine-cell label array (labels relabeled to
        0..k-1 in first-appearance-sorted order)."""
        labels = np.asarray(labels)
        if labels.shape != (fine_grid.q,):
            raise NotAPartition(
                f"label array must have one entry per fine cell ({fine_grid.q})"
            )
        uniq, inv = np.unique(labels, return_inverse=True)
        parts = []
        for k in range(len(uniq)):
            mask = inv == k
            parts.append(
                RefinedSet.from_bool_array(fine_grid, mask, base_order=base_order)
            )
        return cls(parts, _labels=inv.astype(np.int64))

    def label_array(self) -> np.ndarray:
        if self._labels is None:
            labels = np.empty(self.fine_grid.q, dtype=np.int64)
            for k, p in enumerate(self.parts):
                labels[p.to_bool_array()] = k
            self._labels = labels
        return self._labels

    def measures(self):
        return [p.measure() for p in self.parts]

    def __len__(self):
        return len(self.parts)

    def lift(self, extra: int) -> "Partition":
        """The same partition represented on a 2^extra-finer grid."""
        if extra == 0:
            return self
        fine2 = self.fine_grid.refined(extra)
        parent = coarse_index_of_fine(self.fine_grid, extra, np.arange(fine2.q))
        base = self.parts[0].base_order
        return Partition.from_labels(fine2, self.label_array()[parent], base_order=base)


def partition_entropy(partition: Partition) -> float:
    """H(P) = -sum mu(part) log mu(part), natural log, 0 log 0 = 0."""
    h = 0.0
    for mu in partition.measures():
        p = float(mu)
        if p > 0.0:
            h -= p * math.log(p)
    return h


def join(p: Partition, q: Partition) -> Partition:
    """Common refinement: all nonempty pairwise intersections."""
    if p.fine_grid != q.fine_grid:
        raise GridMismatch(
            f"partitions on different fine grids: {p.fine_grid} vs {q.fine_grid}"
        )
    la, lb = p.label_array(), q.label_array()
    base = p.parts[0].base_order
    return Partition.from_labels(
        p.fine_grid, la * (lb.max() + 1) + lb, base_order=base
    )


def _entropy_of_counts(counts, total) -> float:
    p = counts / float(total)
    return float(-np.sum(p * np.log(p)))


def _fine_translation_map(sigma: CellPermutation, grid: DyadicGrid, refine: int):
    """Forward fine-index map of the cell-translation automorphism: fine cell
    j (in coarse cell i, offset o) goes to the same offset in sigma(i)."""
    fine = grid.refined(refine)
    sub = 1 << refine
    fine_multi = fine.all_multi_indices()
    coarse_multi = fine_multi // sub
    offs = fine_multi % sub
    flat_c = coarse_multi[:, 0]
    for a in range(1, grid.dim):
        flat_c = flat_c * grid.side + coarse_multi[:, a]
    img_multi = grid.all_multi_indices()[sigma.image[flat_c]] * sub + offs
    out = img_multi[:, 0]
    for a in range(1, grid.dim):
        out = out * fine.side + img_multi[:, a]
    return out.astype(np.int64)


def entropy_rate_estimate(dyn, partition: Partition, l: int, refine: int | None = None) -> float:
    """H(P ∨ dyn^-1 P ∨ ... ∨ dyn^-(l-1) P) / l.

    A cell permutation acts exactly (offset-preserving cell translation); a
    measure map transports by fine-cell midpoints, at the partition's own
    resolution unless `refine` asks for base_order + refine.  For any cell
    permutation with its own cell partition the joint collapses and the
    estimate is log(q)/l.
    """
    if l < 1:
        raise DomainError(f"need l >= 1, got {l}")
    base_order = partition.parts[0].base_order
    target_order = partition.fine_grid.order
    if refine is not None:
        target_order = max(target_order, base_order + refine)
    if isinstance(dyn, CellPermutation):
        dim = partition.fine_grid.dim
        m = round(math.log2(dyn.q) / dim)
        if (1 << (dim * m)) != dyn.q:
            raise GridMismatch(
                f"permutation of {dyn.q} cells is not a dyadic grid in dim {dim}"
            )
        target_order = max(target_order, m)
        part = partition.lift(target_order - partition.fine_grid.order)
        grid = DyadicGrid(dim, m, partition.fine_grid.topology)
        fwd = _fine_translation_map(dyn, grid, target_order - m)
        labels = part.label_array()
        combo = labels.copy()
        cur = np.arange(part.fine_grid.q, dtype=np.int64)
        for _ in range(1, l):
            cur = fwd[cur]
            step = labels[cur]
            _, combo = np.unique(combo * (step.max() + 2) + step, return_inverse=True)
        counts = np.bincount(combo)
        h = _entropy_of_counts(counts[counts > 0], part.fine_grid.q)
        return h / l
    if isinstance(dyn, MeasureMap):
        part = partition.lift(target_order - partition.fine_grid.order)
        fine = part.fine_grid
        labels = part.label_array()
        pts = fine.centers()
        combo = labels.copy()
        for _ in range(1, l):
            pts = dyn(pts)
            step = labels[fine.cell_of_points(pts)]
            _, combo = np.unique(combo * (step.max() + 2) + step, return_inverse=True)
        counts = np.bincount(combo)
        h = _entropy_of_counts(counts[counts > 0], fine.q)
        return h / l
    raise DomainError(f"unsupported dynamics object {type(dyn).__name__}")


def katok_stepin_gap_bound(l: int, delta, q: int) -> float:
    """-l*d*log(l*d/q^l) with d the one-step image-difference sum; the joint
    entropy of a map exceeds its approximation's by at most this much."""
    d = float(delta)
    if d < 0:
        raise DomainError(f"delta must be >= 0, got {d}")
    if d == 0.0:
        return 0.0
    return -l * d * math.log(l * d / float(q) ** l)


# -- exact rectangle models -----------------------------------------------------


class Rect:
    """Closed axis-aligned rectangle with Fraction corners."""

    __slots__ = ("x0", "x1", "y0", "y1")

    def __init__(self, x0, x1, y0, y1):
        self.x0 = Fraction(x0)
        self.x1 = Fraction(x1)
        self.y0 = Fraction(y0)
        self.y1 = Fraction(y1)

    @classmethod
    def unit(cls):
        return cls(0, 1, 0, 1)

    @property
    def width(self):
        return self.x1 - self.x0

    @property
    def height(self):
        return self.y1 - self.y0

    def is_empty(self) -> bool:
        return self.x1 <= self.x0 or self.y1 <= self.y0

    def intersect(self, o: "Rect") -> "Rect":
        return Rect(
            max(self.x0, o.x0),
            min(self.x1, o.x1),
            max(self.y0, o.y0),
            min(self.y1, o.y1),
        )

    def __eq__(self, o):
        return (
            isinstance(o, Rect)
            and (self.x0, self.x1, self.y0, self.y1) == (o.x0, o.x1, o.y0, o.y1)
        )

    def __hash__(self):
        return hash((self.x0, self.x1, self.y0, self.y1))

    def __repr__(self):
        return f"Rect([{self.x0}, {self.x1}] x [{self.y0}, {self.y1}])"


class Branch:
    """One affine piece (x, y) -> (ax*x + bx, ay*y + by) on a rectangular
    domain, with |ax*ay| = 1 so area is preserved exactly."""

    __slots__ = ("domain", "ax", "bx", "ay", "by")

    def __init__(self, domain: Rect, ax, bx, ay, by):
        self.domain = domain
        self.ax = Fraction(ax)
        self.bx = Fraction(bx)
        self.ay = Fraction(ay)
        self.by = Fraction(by)
        if abs(self.ax * self.ay) != 1:
            raise DomainError(
                f"branch determinant {self.ax * self.ay} is not area-preserving"
            )

    def map_point(self, x, y):
        return self.ax * Fraction(x) + self.bx, self.ay * Fraction(y) + self.by

    def _interval_image(self, a, b, lo, hi):
        u, v = a * lo + b, a * hi + b
        return (u, v) if u <= v else (v, u)

    def map_rect(self, r: Rect) -> Rect:
        X = self._interval_image(self.ax, self.bx, r.x0, r.x1)
        Y = self._interval_image(self.ay, self.by, r.y0, r.y1)
        return Rect(X[0], X[1], Y[0], Y[1])

    def preimage_rect(self, r: Rect) -> Rect:
        X = self._interval_image(1 / self.ax, -self.bx / self.ax, r.x0, r.x1)
        Y = self._interval_image(1 / self.ay, -self.by / self.ay, r.y0, r.y1)
        return Rect(X[0], X[1], Y[0], Y[1])

    def __repr__(self):
        return f"Branch({self.domain!r}, x->{self.ax}x+{self.bx}, y->{self.ay}y+{self.by})"


class RectModel:
    """Piecewise-affine area-preserving map of a core rectangle, as an exact
    branch list."""

    __slots__ = ("branches", "core")

    def __init__(self, branches, core: Rect | None = None):
        self.branches = list(branches)
        self.core = core if core is not None else Rect.unit()

    @classmethod
    def from_baker(cls, k: int) -> "RectModel":
        """The k-branch baker map as exact branches: strip i = [i/k,(i+1)/k] x
        [0,1] maps by (x,y) -> (kx - i, (y+i)/k)."""
        if k < 2:
            raise DomainError(f"baker model needs k >= 2, got {k}")
        branches = [
            Branch(
                Rect(Fraction(i, k), Fraction(i + 1, k), 0, 1),
                k,
                -i,
                Fraction(1, k),
                Fraction(i, k),
            )
            for i in range(k)
        ]
        return cls(branches)

    @classmethod
    def identity_model(cls) -> "RectModel":
        return cls([Branch(Rect.unit(), 1, 0, 1, 0)])

    def then(self, other: "RectModel") -> "RectModel":
        """Composition applying self first, then other; branch domains are
        intersected exactly and empty pieces dropped."""
        out = []
        for b1 in self.branches:
            for b2 in other.branches:
                dom = b1.domain.intersect(b1.preimage_rect(b2.domain))
                if dom.is_empty():
                    continue
                out.append(
                    Branch(
                        dom,
                        b2.ax * b1.ax,
                        b2.ax * b1.bx + b2.bx,
                        b2.ay * b1.ay,
                        b2.ay * b1.by + b2.by,
                    )
                )
        return RectModel(out, self.core)

    def power(self, l: int) -> "RectModel":
        if l < 1:
            raise DomainError(f"need l >= 1, got {l}")
        out = self
        for _ in range(l - 1):
            out = out.then(self)
        return out


def _crossings(model: RectModel, r1: Rect, r2: Rect, transpose: bool):
    """Branch pieces whose image fully crosses r2 and whose source fully
    crosses r1, in one orientation.

    Untransposed: the image is a full-width horizontal strip of r2, strictly
    thinner than r2; the source is a full-height vertical strip of r1,
    strictly narrower than r1.  transpose=True swaps the roles of the axes.
    Returns (source strip interval, image strip interval) pairs, where the
    interval is the transverse extent of each strip.
    """
    out = []
    for b in model.branches:
        if not isinstance(b, Branch):
            raise UnsupportedGeometry(
                f"crossing detection needs axis-aligned affine branches, got {type(b).__name__}"
            )
        src = b.domain.intersect(r1)
        if src.is_empty():
            continue
        img = b.map_rect(src).intersect(r2)
        if img.is_empty():
            continue
        piece = b.preimage_rect(img).intersect(src)
        if piece.is_empty():
            continue
        img = b.map_rect(piece)
        if not transpose:
            full_img = img.x0 == r2.x0 and img.x1 == r2.x1 and img.height < r2.height
            full_src = (
                piece.y0 == r1.y0 and piece.y1 == r1.y1 and piece.width < r1.width
            )
            if full_img and full_src:
                out.append(((piece.x0, piece.x1), (img.y0, img.y1)))
        else:
            full_img = img.y0 == r2.y0 and img.y1 == r2.y1 and img.width < r2.width
            full_src = (
                piece.x0 == r1.x0 and piece.x1 == r1.x1 and piece.height < r1.height
            )
            if full_img and full_src:
                out.append(((piece.y0, piece.y1), (img.x0, img.x1)))
    return out


def markov_components(model: RectModel, r1: Rect, r2: Rect) -> int:
    """Number of branch pieces of f(r1) ∩ r2 that cross r2 fully in one axis
    (strict in the other) and come from strips crossing r1 fully in the
    transverse axis.  Both orientations are tried, the better one counts;
    touching strips from distinct branches count separately."""
    return max(
        len(_crossings(model, r1, r2, False)), len(_crossings(model, r1, r2, True))
    )


def horseshoe_entropy_lower(model: RectModel, m: int, eps: float | None = None) -> float:
    """(1/m) log of the number of length-m itineraries through the crossing
    components of the model's core.

    Points realizing distinct itineraries are (m, eps)-separated whenever eps
    is at most the pitch between component center lines (at the last time two
    itineraries differ, the orbits sit in different source strips at matching
    relative positions).  eps defaults to half that pitch; GapTooSmall if it
    exceeds the pitch.
    """
    if m < 1:
        raise DomainError(f"need m >= 1, got {m}")
    core = model.core
    a = _crossings(model, core, core, False)
    b = _crossings(model, core, core, True)
    comps = a if len(a) >= len(b) else b
    k = len(comps)
    if k == 0:
        return 0.0
    if k >= 2:
        centers = sorted((lo + hi) / 2 for (lo, hi), _ in comps)
        gap = float(min(y - x for x, y in zip(centers, centers[1:])))
        if gap <= 0.0:
            raise GapTooSmall("crossing components share a center line")
        if eps is None:
            eps = gap / 2.0
        if eps > gap:
            raise GapTooSmall(
                f"eps = {eps} exceeds the component pitch {gap}; points from "
                "distinct itineraries are only certified separated below it"
            )
    # a full-crossing image strip meets every full-crossing source strip in a
    # positive-area rectangle, so all k^2 transitions are admissible
    T = [[1] * k for _ in range(k)]
    counts = [1] * k
    for _ in range(m - 1):
        counts = [sum(T[i][j] * counts[i] for i in range(k)) for j in range(k)]
    total = sum(counts)
    return math.log(total) / m
