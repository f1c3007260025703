"""Measure-preserving maps of the unit square/torus and cell-overlap statistics.

The catalog covers translations, unimodular torus automorphisms, k-branch
baker maps, planar twist maps, compositions, and automorphisms induced by a
cell permutation.  Every map evaluates vectorized on (N, n) point arrays.
The overlap matrix of a map against a dyadic grid counts where stratified
sample points of each cell land; exact closed forms replace sampling when
the map is known to permute the cells.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, DomainError
from .grid import DyadicGrid


class MeasureMap:
    """Immutable measure-preserving map of [0,1]^n (torus conventions, mod 1).

    Use the module-level constructors (identity, translation, torus_linear,
    k_baker, twist, composition, dyadic_permutation) rather than calling this
    directly.  `exact` is set when cell overlaps admit a closed form.
    """

    __slots__ = ("kind", "dim", "params", "exact", "_spec")

    def __init__(self, kind, dim, params, exact=False, spec=None):
        self.kind = kind
        self.dim = dim
        self.params = params
        self.exact = exact
        self._spec = spec

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        P = np.atleast_2d(pts)
        if P.shape[1] != self.dim:
            raise DomainError(f"points have dim {P.shape[1]}, map has dim {self.dim}")
        if np.any(P < 0.0) or np.any(P >= 1.0):
            raise DomainError("points must lie in [0,1)^n")
        out = self._apply(P)
        return out[0] if single else out

    def _apply(self, P):
        kind = self.kind
        if kind == "identity":
            return P.copy()
        if kind == "translation":
            return np.mod(P + self.params["v"], 1.0)
        if kind == "torus_linear":
            return np.mod(P @ self.params["M"].T, 1.0)
        if kind == "k_baker":
            k = self.params["k"]
            x = np.mod(P[:, 0], 1.0)
            y = np.mod(P[:, 1], 1.0)
            u = k * x
            j = np.minimum(np.floor(u), k - 1)
            return np.stack([u - j, (y + j) / k], axis=1)
        if kind == "twist":
            return self.params["twist"].eval(P)
        if kind == "composition":
            out = P
            for f in self.params["factors"]:
                out = f._apply(np.atleast_2d(np.asarray(out, dtype=float)))
            return out
        if kind == "dyadic_permutation":
            grid = self.params["grid"]
            lowers = self.params["lowers"]
            image = self.params["image"]
            src = grid.cell_of_points(P)
            out = P + lowers[image[src]] - lowers[src]
            if grid.topology == "torus":
                out = np.mod(out, 1.0)
            return out
        raise DomainError(f"unknown map kind {kind!r}")

    def iterate(self, pts, p):
        """Apply the map p times (p >= 0) to the given points."""
        pts = np.asarray(pts, dtype=float)
        if p <= 0:
            return pts.copy()
        single = pts.ndim == 1
        out = np.atleast_2d(self(pts))
        # later steps feed our own output back in, so skip re-validation
        for _ in range(p - 1):
            out = self._apply(out)
        return out[0] if single else out

    def inverse(self):
        kind = self.kind
        if kind == "identity":
            return self
        if kind == "translation":
            return translation(-self.params["v"])
        if kind == "torus_linear":
            return torus_linear(self.params["Minv"])
        if kind == "k_baker":
            return _baker_inverse(self.params["k"])
        if kind == "twist":
            tw = self.params["twist"]
            if hasattr(tw, "inverse"):
                return twist(tw.inverse())
            raise DomainError("twist object does not expose an inverse")
        if kind == "composition":
            return composition([f.inverse() for f in reversed(self.params["factors"])])
        if kind == "dyadic_permutation":
            img = self.params["image"]
            inv = np.empty_like(img)
            inv[img] = np.arange(len(img))
            return dyadic_permutation(self.params["grid"], inv)
        raise DomainError(f"unknown map kind {kind!r}")

    def exact_cell_permutation(self, grid: DyadicGrid):
        """Image-cell index array if this map permutes the cells of `grid`
        in closed form, else None."""
        if self.kind == "identity":
            return np.arange(grid.q, dtype=np.int64)
        if self.kind == "translation":
            t = np.asarray(self.params["v"], dtype=float) * grid.side
            t_int = np.round(t)
            if not np.all(t == t_int):
                return None
            multi = grid.all_multi_indices()
            shifted = np.mod(multi + t_int.astype(np.int64), grid.side)
            flat = shifted[:, 0]
            for a in range(1, grid.dim):
                flat = flat * grid.side + shifted[:, a]
            return flat.astype(np.int64)
        if self.kind == "dyadic_permutation":
            own = self.params["grid"]
            if own.dim == grid.dim and own.order == grid.order:
                return self.params["image"].copy()
            return None
        if self.kind == "composition":
            acc = np.arange(grid.q, dtype=np.int64)
            for f in self.params["factors"]:
                step = f.exact_cell_permutation(grid)
                if step is None:
                    return None
                acc = step[acc]
            return acc
        return None

    def describe(self):
        """Round-trippable spec string where one exists, else a readable tag."""
        if self._spec is not None:
            return self._spec
        kind = self.kind
        if kind == "identity":
            return "identity"
        if kind == "translation":
            return "translation:" + ",".join(repr(float(c)) for c in self.params["v"])
        if kind == "torus_linear":
            return "torus_linear:" + ",".join(
                str(int(c)) for c in self.params["M"].ravel()
            )
        if kind == "k_baker":
            return f"baker:{self.params['k']}"
        if kind == "twist":
            tw = self.params["twist"]
            return f"twist:{tw.center[0]!r},{tw.center[1]!r},{tw.radius!r}"
        if kind == "composition":
            return "compose(" + "|".join(f.describe() for f in self.params["factors"]) + ")"
        if kind == "dyadic_permutation":
            return f"dyadic_permutation[order={self.params['grid'].order}]"
        return kind

    def __repr__(self):
        return f"MeasureMap({self.describe()!r}, dim={self.dim})"


# -- catalog constructors ---------------------------------------------------


def identity(dim=2):
    return MeasureMap("identity", dim, {}, exact=True)


def translation(v):
    """Torus translation x -> x + v mod 1."""
    v = np.asarray(v, dtype=float).ravel()
    return MeasureMap("translation", len(v), {"v": v}, exact=True)


def torus_linear(M):
    """Torus automorphism x -> Mx mod 1 for an integer matrix with |det| = 1."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError("torus_linear matrix must be square")
    if not np.all(M == np.round(M)):
        raise DomainError("torus_linear matrix must have integer entries")
    M = np.round(M).astype(np.int64)
    det = int(round(np.linalg.det(M.astype(float))))
    if abs(det) != 1:
        raise DomainError(f"torus_linear matrix must be unimodular, det = {det}")
    Minv = np.round(np.linalg.inv(M.astype(float))).astype(np.int64)
    if not np.array_equal(M @ Minv, np.eye(M.shape[0], dtype=np.int64)):
        raise DomainError("failed to invert unimodular matrix exactly")
    return MeasureMap("torus_linear", M.shape[0], {"M": M, "Minv": Minv})


def cat_map():
    """Arnold cat map, the standard hyperbolic torus automorphism."""
    return torus_linear([[2, 1], [1, 1]])


def k_baker(k):
    """Area-preserving k-branch baker map (x,y) -> (kx mod 1, (y + floor(kx))/k)."""
    k = int(k)
    if k < 2:
        raise DomainError(f"baker map needs k >= 2 branches, got {k}")
    return MeasureMap("k_baker", 2, {"k": k})


def _baker_inverse(k):
    """Inverse baker map (u,v) -> ((u + floor(kv))/k, kv - floor(kv))."""

    class _Inv:
        def __init__(self, k):
            self.k = k

        def eval(self, P):
            u = np.mod(P[:, 0], 1.0)
            v = np.mod(P[:, 1], 1.0)
            w = self.k * v
            j = np.minimum(np.floor(w), self.k - 1)
            return np.stack([(u + j) / self.k, w - j], axis=1)

    return MeasureMap("twist", 2, {"twist": _Inv(k)}, spec=f"baker_inverse:{k}")


def twist(twist_obj):
    """Wrap a planar twist map (anything with a vectorized .eval((N,2)) method)."""
    return MeasureMap("twist", 2, {"twist": twist_obj})


def composition(factors):
    """Composition applying factors left to right (factors[0] first)."""
    factors = list(factors)
    if not factors:
        raise DomainError("composition needs at least one factor")
    dim = factors[0].dim
    if any(f.dim != dim for f in factors):
        raise DomainError("composition factors must share a dimension")
    exact = all(f.exact for f in factors)
    return MeasureMap("composition", dim, {"factors": factors}, exact=exact)


def dyadic_permutation(grid: DyadicGrid, image):
    """Automorphism permuting the cells of `grid`, translating each cell onto
    its image cell."""
    image = np.asarray(image, dtype=np.int64)
    if image.shape != (grid.q,) or not np.array_equal(
        np.sort(image), np.arange(grid.q)
    ):
        raise DomainError("image must be a permutation of the grid's cells")
    lowers = grid.all_multi_indices().astype(float) / grid.side
    return MeasureMap(
        "dyadic_permutation",
        grid.dim,
        {"grid": grid, "image": image, "lowers": lowers},
        exact=True,
    )


# -- spec strings -----------------------------------------------------------


def parse_map_spec(spec, dim=2):
    """Parse a map spec string: identity | translation:0.5,0.0 |
    torus_linear:2,1,1,1 | cat | baker:3 | twist:cx,cy,R | compose(a|b|...)."""
    s = spec.strip()
    if s.startswith("compose(") and s.endswith(")"):
        inner = s[len("compose(") : -1]
        parts = [p for p in inner.split("|") if p.strip()]
        if not parts:
            raise ConfigError(f"empty composition in map spec {spec!r}")
        m = composition([parse_map_spec(p, dim) for p in parts])
        m = MeasureMap(m.kind, m.dim, m.params, m.exact, spec=s)
        return m
    head, _, tail = s.partition(":")
    head = head.strip()
    try:
        if head == "identity":
            return identity(dim)
        if head == "cat":
            return cat_map()
        if head == "translation":
            # components accept decimals or rationals like 1/4
            v = [float(Fraction(c.strip())) for c in tail.split(",")]
            return translation(v)
        if head == "torus_linear":
            entries = [int(c) for c in tail.split(",")]
            n = math.isqrt(len(entries))
            if n * n != len(entries):
                raise ConfigError(
                    f"torus_linear needs a square number of entries, got {len(entries)}"
                )
            return torus_linear(np.array(entries).reshape(n, n))
        if head == "baker":
            return k_baker(int(tail))
        if head == "twist":
            from .extension import TwistMap

            cx, cy, r = (float(Fraction(c.strip())) for c in tail.split(","))
            return twist(TwistMap((cx, cy), r))
    except ConfigError:
        raise
    except (ValueError, ZeroDivisionError, DomainError) as e:
        raise ConfigError(f"bad map spec {spec!r}: {e}") from e
    raise ConfigError(f"unknown map kind in spec {spec!r}")


# -- sampling and overlaps ----------------------------------------------------


def stratified_sample(grid: DyadicGrid, s):
    """(q, s^n, n) array: the s^n sub-cell midpoints of every cell, flat order.

    Deterministic; these are the midpoints of the grid refined s-fold, grouped
    by parent cell.
    """
    if s < 1:
        raise DomainError(f"sampling density must be >= 1, got {s}")
    offs_1d = (np.arange(s) + 0.5) / (s * grid.side)
    mesh = np.meshgrid(*([offs_1d] * grid.dim), indexing="ij")
    offsets = np.stack([m.ravel() for m in mesh], axis=1)  # (s^n, n)
    lowers = grid.all_multi_indices().astype(float) / grid.side  # (q, n)
    return lowers[:, None, :] + offsets[None, :, :]


class OverlapMatrix:
    """Sparse cell-overlap statistics of a map against a grid.

    counts[i, j] is how many of the row_total sample points of cell i land in
    cell j.  The weight matrix counts/(q*row_total) has every row summing to
    exactly 1/q; exact matrices (row_total 1) are permutation matrices over q.
    """

    __slots__ = ("grid", "counts", "row_total", "exact")

    def __init__(self, grid, counts, row_total, exact=False):
        self.grid = grid
        self.counts = counts.tocsr()
        self.counts.sum_duplicates()
        self.row_total = int(row_total)
        self.exact = exact

    @property
    def q(self):
        return self.grid.q

    def weights(self):
        """Dense-free float weight matrix w, rows summing to 1/q."""
        w = self.counts.astype(float)
        w.data /= self.q * self.row_total
        return w

    def row_sums(self):
        return np.asarray(self.counts.sum(axis=1)).ravel() / (self.q * self.row_total)

    def col_sums(self):
        return np.asarray(self.counts.sum(axis=0)).ravel() / (self.q * self.row_total)

    def overlap_count(self, i, j):
        return int(self.counts[i, j])

    def positive_pairs(self):
        coo = self.counts.tocoo()
        return list(zip(coo.row.tolist(), coo.col.tolist()))


def overlap_matrix(map_, grid: DyadicGrid, s=8) -> OverlapMatrix:
    """Overlap statistics of map_ against grid at stratified density s per axis.

    Maps that provably permute the cells (identity, cell-aligned dyadic
    translations, induced cell permutations, compositions thereof) get an
    exact single-entry-per-row matrix independent of s; everything else is
    sampled with s^n deterministic stratified midpoints per cell.
    """
    perm = map_.exact_cell_permutation(grid) if map_.exact else None
    q = grid.q
    if perm is not None:
        counts = sp.coo_matrix(
            (np.ones(q, dtype=np.int64), (np.arange(q), perm)), shape=(q, q)
        )
        return OverlapMatrix(grid, counts, 1, exact=True)
    pts = stratified_sample(grid, s)
    row_total = pts.shape[1]
    images = map_(pts.reshape(-1, grid.dim))
    dest = grid.cell_of_points(images)
    src = np.repeat(np.arange(q, dtype=np.int64), row_total)
    counts = sp.coo_matrix(
        (np.ones(q * row_total, dtype=np.int64), (src, dest)), shape=(q, q)
    )
    return OverlapMatrix(grid, counts, row_total, exact=False)


def image_diameters(map_, grid: DyadicGrid, s=8):
    """(q,) array: sampled diameter of each cell's image under the grid metric.

    Diameter of the image cloud of the s^n stratified midpoints of the cell;
    a lower estimate of the true image diameter that converges as s grows.
    """
    pts = stratified_sample(grid, s)
    k = pts.shape[1]
    images = map_(pts.reshape(-1, grid.dim)).reshape(grid.q, k, grid.dim)
    out = np.zeros(grid.q)
    iu, ju = np.triu_indices(k, 1)
    if len(iu) == 0:
        return out
    d = grid.dist(images[:, iu, :], images[:, ju, :])
    return d.max(axis=1)
