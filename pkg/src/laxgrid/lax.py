"""Cell-permutation approximation of measure-preserving maps.

Pipeline: estimate the overlap matrix of the map against a dyadic grid, pick
a perfect matching supported on positive overlaps (maximum total weight,
lexicographic tie-break), then optionally repair the cycle structure — merge
everything into a single q-cycle by composing with a small-displacement
permutation along a Hamiltonian cell cycle, or further split into exactly two
cycles of odd coprime lengths.  Each result carries a certificate with a
sup-distance bound.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import min_weight_full_bipartite_matching

from .errors import DomainError, NoCycle, NoPerfectMatching, NotCoprime, NotCyclic, OddOrder
from .grid import DyadicGrid, snake_order
from .maps import OverlapMatrix, image_diameters, overlap_matrix


class CellPermutation:
    """Permutation of the q cells of a grid, stored as its image array.

    The cycle decomposition is computed once and cached; cycles start at
    their smallest element and are listed by increasing start.
    """

    __slots__ = ("image", "_cycles")

    def __init__(self, image):
        image = np.array(image, dtype=np.int64)
        if image.ndim != 1 or not np.array_equal(np.sort(image), np.arange(len(image))):
            raise DomainError("image must be a permutation of 0..q-1")
        image.setflags(write=False)
        self.image = image
        self._cycles = None

    @classmethod
    def identity(cls, q):
        return cls(np.arange(q))

    @property
    def q(self):
        return len(self.image)

    def __len__(self):
        return len(self.image)

    def __call__(self, i):
        return self.image[i]

    def __eq__(self, other):
        return isinstance(other, CellPermutation) and np.array_equal(
            self.image, other.image
        )

    def __hash__(self):
        return hash(self.image.tobytes())

    def __repr__(self):
        if self.q <= 16:
            return f"CellPermutation({self.image.tolist()})"
        return f"CellPermutation(q={self.q}, cycles={self.cycle_lengths()})"

    def compose(self, other):
        """self after other: (self.compose(other))(x) = self(other(x))."""
        return CellPermutation(self.image[other.image])

    def inverse(self):
        inv = np.empty_like(self.image)
        inv[self.image] = np.arange(self.q)
        return CellPermutation(inv)

    def power(self, p):
        """p-fold composition (negative p uses the inverse)."""
        if p < 0:
            return self.inverse().power(-p)
        result = np.arange(self.q)
        base = self.image
        while p:
            if p & 1:
                result = base[result]
            base = base[base]
            p >>= 1
        return CellPermutation(result)

    @property
    def cycles(self):
        """Cycle decomposition as lists of ints; each cycle starts at its
        smallest element, cycles ordered by that start."""
        if self._cycles is None:
            seen = np.zeros(self.q, dtype=bool)
            out = []
            img = self.image
            for start in range(self.q):
                if seen[start]:
                    continue
                cyc = []
                j = start
                while not seen[j]:
                    seen[j] = True
                    cyc.append(int(j))
                    j = img[j]
                out.append(cyc)
            self._cycles = out
        return self._cycles

    def cycle_lengths(self):
        return sorted(len(c) for c in self.cycles)

    def num_cycles(self):
        return len(self.cycles)

    def is_cyclic(self):
        return self.num_cycles() == 1

    def cyclic_displacement(self):
        """max_k |image(k) - k| in the cyclic metric on Z/q."""
        d = np.abs(self.image - np.arange(self.q))
        return int(np.minimum(d, self.q - d).max(initial=0))

    def to_json_dict(self):
        return {"image": self.image.tolist(), "cycles": self.cycles}


class LaxCertificate:
    """What the approximation pipeline can vouch for.

    matched_overlap_ok flags, per cell, whether the matching stage paired the
    cell with a positively-overlapping image cell (true by construction when
    matching succeeds); final_overlap_ok re-checks the returned permutation,
    which cycle repairs may have moved off-support.  strong_bound is a
    certified upper bound on the sup-distance between the map and the
    cell-translation automorphism of the returned permutation:
    max over cells of [cell diameter + image diameter], plus one cell
    diameter per unit of extra displacement introduced by each repair stage
    (two for the single-cycle merge, one more for the two-cycle split).
    """

    __slots__ = (
        "mode",
        "strong_bound",
        "matched_overlap_ok",
        "final_overlap_ok",
        "base_bound",
        "cell_diameter",
        "matching_image",
    )

    def __init__(
        self,
        mode,
        strong_bound,
        matched_overlap_ok,
        final_overlap_ok,
        base_bound,
        cell_diameter,
        matching_image,
    ):
        self.mode = mode
        self.strong_bound = float(strong_bound)
        self.matched_overlap_ok = matched_overlap_ok
        self.final_overlap_ok = final_overlap_ok
        self.base_bound = float(base_bound)
        self.cell_diameter = float(cell_diameter)
        self.matching_image = matching_image

    def all_matched_positive(self):
        return bool(np.all(self.matched_overlap_ok))

    def final_positive_fraction(self):
        return float(np.mean(self.final_overlap_ok))

    def to_json_dict(self):
        return {
            "mode": self.mode,
            "strong_bound": self.strong_bound,
            "base_bound": self.base_bound,
            "cell_diameter": self.cell_diameter,
            "matched_overlap_ok": bool(self.all_matched_positive()),
            "final_overlap_positive_fraction": self.final_positive_fraction(),
        }


MODES = ("plain", "cyclic", "bicyclic")


# -- perfect matching --------------------------------------------------------


def _as_int_counts(weights):
    """Coerce matching input to a csr int64 matrix with the same argmax set.

    OverlapMatrix passes its counts through; float matrices are scaled to
    integers exactly (binary floats are dyadic rationals) so optimum
    comparisons stay exact.
    """
    if isinstance(weights, OverlapMatrix):
        counts = weights.counts.copy()
    else:
        coo = sp.coo_matrix(np.asarray(weights)) if not sp.issparse(weights) else weights.tocoo()
        if np.any(coo.data < 0):
            raise DomainError("matching weights must be nonnegative")
        if coo.data.dtype.kind in "iu":
            data = coo.data.astype(np.int64)
        else:
            fracs = [Fraction(float(x)) for x in coo.data]
            denom = 1
            for f in fracs:
                denom = denom * f.denominator // gcd(denom, f.denominator)
            scaled = [f * denom for f in fracs]
            if any(s > np.iinfo(np.int64).max for s in scaled):
                raise DomainError("weights have too fine a resolution to integerize")
            data = np.array([int(s) for s in scaled], dtype=np.int64)
        counts = sp.coo_matrix((data, (coo.row, coo.col)), shape=coo.shape).tocsr()
    counts.sum_duplicates()
    counts.eliminate_zeros()
    return counts


def _solve_assignment(counts):
    """Max-total-weight full matching on the positive support; (cols, value)."""
    if counts.shape[0] == 0:
        return np.empty(0, dtype=np.int64), 0
    neg = counts.copy()
    neg.data = -neg.data
    try:
        rows, cols = min_weight_full_bipartite_matching(neg)
    except ValueError as e:
        raise NoPerfectMatching(str(e)) from e
    order = np.argsort(rows)
    cols = cols[order]
    value = int(
        sum(int(counts[int(r), int(c)]) for r, c in enumerate(cols))
    )
    return cols, value


def hall_matching(weights):
    """Perfect matching supported on strictly positive weights.

    Maximum total weight; among optima, the lexicographically smallest
    assignment by (row, column).  Accepts an OverlapMatrix or any
    nonnegative matrix.  Raises NoPerfectMatching when the positive support
    admits no perfect matching — with sampled overlaps that usually means
    the sampling density is too coarse.
    """
    counts = _as_int_counts(weights)
    if counts.shape[0] != counts.shape[1]:
        raise DomainError(f"matching needs a square matrix, got {counts.shape}")
    q = counts.shape[0]
    if q == 0:
        return CellPermutation(np.empty(0, dtype=np.int64))
    perm, best = _solve_assignment(counts)
    perm = perm.astype(np.int64)

    # Lexicographic refinement: walk the rows, and for each try every smaller
    # positive column; accept it iff fixing the prefix still reaches the
    # optimum (all-integer comparison, so ties are exact).  A suffix bound of
    # per-row maxima prunes candidates that cannot possibly tie, so the
    # sub-solver only runs on genuine near-ties.
    col_free = np.ones(q, dtype=bool)
    prefix = 0
    indptr, indices, data = counts.indptr, counts.indices, counts.data
    row_max = np.zeros(q, dtype=np.int64)
    for i in range(q):
        if indptr[i] < indptr[i + 1]:
            row_max[i] = data[indptr[i] : indptr[i + 1]].max()
    suffix = np.concatenate([np.cumsum(row_max[::-1])[::-1][1:], [0]])
    for i in range(q):
        row_cols = indices[indptr[i] : indptr[i + 1]]
        row_wts = data[indptr[i] : indptr[i + 1]]
        for j, w in zip(row_cols, row_wts):
            if j >= perm[i]:
                break
            if not col_free[j]:
                continue
            if prefix + int(w) + int(suffix[i]) < best:
                continue
            rem_cols = np.where(col_free)[0]
            rem_cols = rem_cols[rem_cols != j]
            sub = counts[i + 1 :, :][:, rem_cols]
            try:
                sub_perm, sub_val = _solve_assignment(sub.tocsr())
            except NoPerfectMatching:
                continue
            if prefix + int(w) + sub_val == best:
                perm[i] = j
                perm[i + 1 :] = rem_cols[sub_perm]
                break
        col_free[perm[i]] = False
        prefix += int(counts[i, int(perm[i])])
    return CellPermutation(perm)


# -- cycle repairs ------------------------------------------------------------


class _DSU:
    __slots__ = ("parent",)

    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        self.parent[self.find(a)] = self.find(b)


def cyclicize(sigma: CellPermutation, ordering=None):
    """Merge sigma's cycles into a single q-cycle with a cheap corrector.

    Returns (tau, tau_sigma) with tau_sigma = tau∘sigma a single cycle and
    |tau(k) - k| <= 2 in the cyclic metric along `ordering` (default: the
    cells in index order).  Two sweeps of adjacent transpositions — pairs
    (2i, 2i+1), then (2i+1, 2i+2) — each applied only when its endpoints lie
    in distinct cycles of the current permutation, so every application
    merges two cycles and none splits.
    """
    q = sigma.q
    if ordering is None:
        ordering = np.arange(q, dtype=np.int64)
    else:
        ordering = np.asarray(ordering, dtype=np.int64)
        if len(ordering) != q:
            raise DomainError("ordering must list every cell exactly once")
    pos = np.empty(q, dtype=np.int64)
    pos[ordering] = np.arange(q)
    # position-space copy of sigma: where does the cell at position p go
    pi = pos[sigma.image[ordering]]

    dsu = _DSU(q)
    for a, b in zip(pi, np.arange(q)):
        dsu.union(int(a), int(b))  # connect p with pi(p): same cycle

    tau = np.arange(q, dtype=np.int64)
    tau_inv = np.arange(q, dtype=np.int64)

    def apply_transposition(a, b):
        # left-compose tau with (a b): swap the preimages of a and b
        xa, xb = tau_inv[a], tau_inv[b]
        tau[xa], tau[xb] = b, a
        tau_inv[a], tau_inv[b] = xb, xa

    for start in (0, 1):
        for a in range(start, q - 1, 2):
            b = a + 1
            if dsu.find(a) != dsu.find(b):
                apply_transposition(a, b)
                dsu.union(a, b)

    # back to cell space: tau_cell(ordering[p]) = ordering[tau(p)]
    tau_cell = np.empty(q, dtype=np.int64)
    tau_cell[ordering] = ordering[tau]
    tau_perm = CellPermutation(tau_cell)
    return tau_perm, tau_perm.compose(sigma)


def bicyclize(sigma: CellPermutation, ordering=None):
    """Split a single q-cycle (q even) into exactly two odd coprime cycles.

    Composes with the transposition of the first ordering-adjacent cell pair
    (wraparound included) whose transition time k along sigma is odd with
    gcd(k, q-k) = 1; the result has cycles of lengths {k, q-k}.  When q is a
    power of two any odd k qualifies and such a pair always exists.
    """
    q = sigma.q
    if not sigma.is_cyclic():
        raise NotCyclic(f"need a single {q}-cycle, got cycle lengths {sigma.cycle_lengths()}")
    if q % 2 != 0:
        raise OddOrder(f"need even order to split into two odd cycles, got q={q}")
    if ordering is None:
        ordering = np.arange(q, dtype=np.int64)
    else:
        ordering = np.asarray(ordering, dtype=np.int64)
    # position of each cell along sigma's single cycle
    cyc = sigma.cycles[0]
    pos = np.empty(q, dtype=np.int64)
    pos[cyc] = np.arange(q)
    for p in range(q):
        u = int(ordering[p])
        v = int(ordering[(p + 1) % q])
        k = int((pos[v] - pos[u]) % q)
        if k % 2 == 1 and gcd(k, q - k) == 1:
            image = sigma.image.copy()
            swap = np.where(image == u, -1, image)
            swap[swap == v] = u
            swap[swap == -1] = v
            return CellPermutation(swap)
    raise NotCoprime("no adjacent pair with odd, coprime transition time")


# -- end-to-end pipeline -------------------------------------------------------


def lax_approximate(map_, grid: DyadicGrid, sampling=8, mode="plain"):
    """Approximate a measure-preserving map by a cell permutation.

    mode "plain" returns the raw positive-overlap matching; "cyclic" repairs
    it into a single q-cycle along the grid's snake cycle; "bicyclic" further
    splits into two odd coprime cycles.  Returns (permutation, certificate).
    """
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    overlaps = overlap_matrix(map_, grid, sampling)
    matching = hall_matching(overlaps)
    diam = grid.cell_diameter()
    if overlaps.exact:
        img_diam = np.full(grid.q, diam)
    else:
        img_diam = image_diameters(map_, grid, sampling)
    base = diam + float(img_diam.max(initial=0.0))

    weights = overlaps.counts
    matched_ok = np.asarray(
        weights[np.arange(grid.q), matching.image]
    ).ravel() > 0

    result = matching
    extra = 0.0
    if mode in ("cyclic", "bicyclic"):
        order = snake_order(grid)
        _, result = cyclicize(matching, order)
        extra += 2.0 * diam
        if mode == "bicyclic":
            result = bicyclize(result, order)
            extra += 1.0 * diam

    final_ok = np.asarray(weights[np.arange(grid.q), result.image]).ravel() > 0
    cert = LaxCertificate(
        mode=mode,
        strong_bound=base + extra,
        matched_overlap_ok=matched_ok,
        final_overlap_ok=final_ok,
        base_bound=base,
        cell_diameter=diam,
        matching_image=matching.image,
    )
    return result, cert
