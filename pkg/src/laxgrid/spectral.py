"""Koopman operators of cell permutations and their atomic spectral data.

A permutation's Koopman operator acts by (U v)(i) = v(sigma(i)); restricted
to one L-cycle it is a cyclic shift, so every spectral measure is a sum of
atoms at L-th roots of unity with weights read off a discrete Fourier
transform.  Atoms are keyed by the exact rational angle j/L (as a fraction
of the full turn) so coinciding atoms from different cycles merge exactly.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .lax import CellPermutation


class KoopmanShift:
    """Composition operator of a cell permutation on vectors over cells."""

    __slots__ = ("sigma",)

    def __init__(self, sigma: CellPermutation):
        self.sigma = sigma

    def apply(self, v):
        v = np.asarray(v)
        if v.shape[-1] != self.sigma.q:
            raise DomainError(
                f"vector of length {v.shape[-1]} for a permutation of {self.sigma.q} cells"
            )
        return v[..., self.sigma.image]

    __call__ = apply

    def order(self) -> int:
        """Smallest d >= 1 with U^d = Id: the lcm of the cycle lengths."""
        d = 1
        for c in self.sigma.cycles:
            d = math.lcm(d, len(c))
        return d


class SpectralMeasure:
    """Finite atomic measure on the unit circle.

    Atoms are keyed by the exact fraction of a full turn (Fraction in [0,1));
    the angle in radians is 2*pi times the key.  Zero-weight atoms are
    dropped at construction.
    """

    __slots__ = ("atoms",)

    def __init__(self, atoms):
        cleaned = {}
        for frac, w in dict(atoms).items():
            if w < 0:
                raise DomainError(f"negative atom weight {w}")
            if w > 0:
                cleaned[Fraction(frac) % 1] = cleaned.get(Fraction(frac) % 1, 0.0) + w
        self.atoms = dict(sorted(cleaned.items()))

    def total_mass(self) -> float:
        return float(sum(self.atoms.values()))

    def angles(self):
        """Atom angles in radians, sorted."""
        return [2.0 * math.pi * float(f) for f in self.atoms]

    def weight_at(self, frac) -> float:
        return self.atoms.get(Fraction(frac) % 1, 0.0)

    def support(self):
        return list(self.atoms.keys())

    def __len__(self):
        return len(self.atoms)

    def __repr__(self):
        inside = ", ".join(f"{f}: {w:.4g}" for f, w in list(self.atoms.items())[:6])
        more = "" if len(self.atoms) <= 6 else f", ... ({len(self.atoms)} atoms)"
        return f"SpectralMeasure({{{inside}{more}}})"

    def to_json_list(self):
        """Sorted [{"num": j, "den": L, "weight": w}, ...] with j/L reduced."""
        return [
            {"num": f.numerator, "den": f.denominator, "weight": float(w)}
            for f, w in self.atoms.items()
        ]


def spectral_measure_of_vector(sigma: CellPermutation, v) -> SpectralMeasure:
    """Spectral measure of a vector under the permutation's Koopman shift.

    Per cycle of length L the projected vector's DFT coefficient j feeds the
    atom at turn-fraction j/L with weight |v_hat_j|^2 / L; total mass is the
    squared norm of v.
    """
    v = np.asarray(v, dtype=complex)
    if v.shape != (sigma.q,):
        raise DomainError(f"vector must have shape ({sigma.q},), got {v.shape}")
    atoms = {}
    for cyc in sigma.cycles:
        L = len(cyc)
        coef = np.fft.fft(v[cyc])
        w = (coef.real**2 + coef.imag**2) / L
        for j in range(L):
            if w[j] > 0.0:
                key = Fraction(j, L)
                atoms[key] = atoms.get(key, 0.0) + float(w[j])
    return SpectralMeasure(atoms)


def spectral_type(sigma: CellPermutation) -> SpectralMeasure:
    """Spectral type against the fixed basis of cell indicators.

    Basis vector i (unit indicator of cell i, 0-based) enters with weight
    2^-(i+1); the truncated total 1 - 2^-q is renormalized away, giving a
    probability measure.  Indicator DFTs have constant magnitude, so cell i
    in an L-cycle spreads its weight uniformly over the L-th roots of unity —
    computed in closed form rather than by q transforms.
    """
    q = sigma.q
    atoms = {}
    for cyc in sigma.cycles:
        L = len(cyc)
        cell_weight = sum(2.0 ** (-(i + 1)) for i in cyc)
        per_atom = cell_weight / L
        if per_atom == 0.0:
            continue
        for j in range(L):
            key = Fraction(j, L)
            atoms[key] = atoms.get(key, 0.0) + per_atom
    norm = 1.0 - 2.0 ** (-q) if q < 1075 else 1.0
    return SpectralMeasure({f: w / norm for f, w in atoms.items()})


def cesaro_mixing_diagnostic(sigma: CellPermutation, e1, e2, n: int):
    """Partial Cesàro averages of the mixing deviation, exact rationals.

    Returns [a_1, ..., a_n] with a_N = (1/N) * sum_{i<N} |mu(sigma^i E1 ∩ E2)
    - mu(E1) mu(E2)|.  Everything is integer counting over cells, so the
    output is a list of Fractions.
    """
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    q = sigma.q
    e1 = np.unique(np.asarray(list(e1), dtype=np.int64))
    e2_mask = np.zeros(q, dtype=bool)
    e2_mask[np.asarray(list(e2), dtype=np.int64)] = True
    mu_product = Fraction(len(e1), q) * Fraction(int(e2_mask.sum()), q)
    out = []
    acc = Fraction(0)
    cur = e1.copy()
    for i in range(n):
        inter = int(e2_mask[cur].sum())
        acc += abs(Fraction(inter, q) - mu_product)
        out.append(acc / (i + 1))
        cur = sigma.image[cur]
    return out


def cesaro_unsigned_average(sigma: CellPermutation, e1, e2, n: int) -> Fraction:
    """(1/n) * sum_{i<n} mu(sigma^i E1 ∩ E2), exact; for a q-cycle and n = q
    this equals mu(E1) mu(E2) on the nose."""
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    q = sigma.q
    cur = np.unique(np.asarray(list(e1), dtype=np.int64))
    e2_mask = np.zeros(q, dtype=bool)
    e2_mask[np.asarray(list(e2), dtype=np.int64)] = True
    acc = Fraction(0)
    for _ in range(n):
        acc += Fraction(int(e2_mask[cur].sum()), q)
        cur = sigma.image[cur]
    return acc / n


def rigidity_detector(sigma: CellPermutation):
    """(d, 0.0) with d the lcm of cycle lengths: sigma^d is the identity
    exactly, the degenerate finite witness of weak-limit rigidity."""
    d = KoopmanShift(sigma).order()
    if not np.array_equal(sigma.power(d).image, np.arange(sigma.q)):
        raise DomainError("cycle-length lcm failed to annihilate the permutation")
    return d, 0.0


def mutual_singularity(m1: SpectralMeasure, m2: SpectralMeasure, tol: float = 1e-9) -> bool:
    """True iff no atom of m1 lies within angular tolerance tol (radians,
    circle metric) of an atom of m2."""
    for f1 in m1.atoms:
        for f2 in m2.atoms:
            d = abs(float(f1) - float(f2))
            d = min(d, 1.0 - d)
            if 2.0 * math.pi * d <= tol:
                return False
    return True
