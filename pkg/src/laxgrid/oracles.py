"""Brute-force reference implementations and self-check suites.

Everything here recomputes results by the most direct method available --
enumerating permutations, following orbits one step at a time, O(L^2) Fourier
sums, dense point sampling -- so the main algorithms can be validated against
an independent path.  The suite runners compare the two paths and report a
JSON-friendly summary; the primitives are importable on their own for tests.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from .errors import NoPerfectMatching
from .grid import DyadicGrid, snake_order
from .lax import CellPermutation, bicyclize, cyclicize, hall_matching
from .maps import MeasureMap, overlap_matrix
from .spectral import cesaro_mixing_diagnostic, spectral_measure_of_vector
from .towers import bezout_split, rokhlin_tower, two_column_partition

# -- primitives -------------------------------------------------------------------


def brute_force_matching(counts):
    """Best perfect matching by enumerating all q! of them: returns
    (columns, total) with maximal total, lexicographically smallest column
    tuple among the maximizers, restricted to strictly positive entries.
    None if no positive-support perfect matching exists."""
    counts = np.asarray(counts)
    q = counts.shape[0]
    best = None
    best_val = None
    for perm in itertools.permutations(range(q)):
        if any(counts[i, perm[i]] <= 0 for i in range(q)):
            continue
        val = sum(int(counts[i, perm[i]]) for i in range(q))
        if best_val is None or val > best_val or (val == best_val and perm < best):
            best, best_val = perm, val
    if best is None:
        return None
    return np.asarray(best, dtype=np.int64), best_val


def cycle_type(image) -> list:
    """Cycle lengths of a permutation, by naive orbit following, sorted."""
    image = list(int(v) for v in image)
    seen = [False] * len(image)
    out = []
    for start in range(len(image)):
        if seen[start]:
            continue
        n, j = 0, start
        while not seen[j]:
            seen[j] = True
            j = image[j]
            n += 1
        out.append(n)
    return sorted(out)


def displacement_along(image, ordering) -> int:
    """Max cyclic distance, along the given cyclic ordering, between the
    position of a cell and the position of its image."""
    q = len(image)
    pos = {c: p for p, c in enumerate(ordering)}
    worst = 0
    for c in range(q):
        d = (pos[int(image[c])] - pos[c]) % q
        worst = max(worst, min(d, q - d))
    return worst


def exhaustive_bezout(k: int, p: int, qp: int):
    """Smallest-alpha split k = alpha*p + beta*qp with 0 <= alpha < qp,
    beta >= 0, found by scanning all alpha.  None when impossible."""
    for alpha in range(qp):
        rest = k - alpha * p
        if rest >= 0 and rest % qp == 0:
            return alpha, rest // qp
    return None


def direct_spectral_weights(image, v):
    """Spectral weights of the shift along a permutation by the O(L^2) sum:
    for each cycle of length L and each j, |sum_t v(c_t) e^{-2 pi i j t / L}|^2 / L
    is placed at angle j/L."""
    v = np.asarray(v, dtype=float)
    atoms = {}
    for cyc in _cycles_of(image):
        L = len(cyc)
        vals = [v[c] for c in cyc]
        for j in range(L):
            re = sum(vals[t] * math.cos(-2 * math.pi * j * t / L) for t in range(L))
            im = sum(vals[t] * math.sin(-2 * math.pi * j * t / L) for t in range(L))
            w = (re * re + im * im) / L
            if w > 0.0:
                key = Fraction(j, L)
                atoms[key] = atoms.get(key, 0.0) + w
    return atoms


def _cycles_of(image):
    image = [int(x) for x in image]
    seen = [False] * len(image)
    out = []
    for start in range(len(image)):
        if seen[start]:
            continue
        cyc, j = [], start
        while not seen[j]:
            seen[j] = True
            cyc.append(j)
            j = image[j]
        out.append(cyc)
    return out


def direct_cesaro(image, set1, set2, n: int | None = None):
    """Partial Cesaro averages of |mu(sigma^-i E1 cap E2) - mu(E1)mu(E2)| by
    plain set arithmetic on cell index sets, exact Fractions."""
    q = len(image)
    if n is None:
        n = q
    s1 = set(int(i) for i in set1)
    s2 = set(int(i) for i in set2)
    mu1, mu2 = Fraction(len(s1), q), Fraction(len(s2), q)
    cur = set(s1)
    devs = []
    for _ in range(n):
        devs.append(abs(Fraction(len(cur & s2), q) - mu1 * mu2))
        cur = {int(image[c]) for c in cur}
    return [sum(devs[: i + 1], Fraction(0)) / (i + 1) for i in range(n)]


def dense_overlap_weights(map_: MeasureMap, grid: DyadicGrid, per_side: int = 32):
    """Overlap weights by brute sampling: a per_side^n uniform midpoint mesh
    in each cell is pushed through the map and binned."""
    q, n = grid.q, grid.dim
    W = np.zeros((q, q))
    mesh = (np.arange(per_side) + 0.5) / (per_side * grid.side)
    offsets = np.stack(
        [a.ravel() for a in np.meshgrid(*([mesh] * n), indexing="ij")], axis=1
    )
    total = offsets.shape[0]
    for i in range(q):
        pts = grid.cell_lower(i) + offsets
        dest = grid.cell_of_points(map_(pts))
        for j, cnt in zip(*np.unique(dest, return_counts=True)):
            W[i, j] += cnt
    return W / (q * total)


# -- suites -----------------------------------------------------------------------


def _suite_result(name, checks, failures):
    return {
        "suite": name,
        "checks": checks,
        "failures": failures,
        "passed": not failures,
    }


def suite_matching(seed: int = 1) -> dict:
    rng = np.random.default_rng(seed)
    checks, failures = 0, []
    for q in (2, 3, 4, 5):
        for trial in range(30):
            counts = rng.integers(0, 6, size=(q, q))
            ref = brute_force_matching(counts)
            try:
                cols = hall_matching(counts).image
                got = (cols, int(counts[np.arange(q), cols].sum()))
            except NoPerfectMatching:
                got = None
            checks += 1
            if ref is None or got is None:
                if (ref is None) != (got is None):
                    failures.append(f"q={q} trial={trial}: feasibility disagrees")
                continue
            if got[1] != ref[1] or not np.array_equal(got[0], ref[0]):
                failures.append(
                    f"q={q} trial={trial}: got {got[0].tolist()}/{got[1]},"
                    f" reference {ref[0].tolist()}/{ref[1]}"
                )
    return _suite_result("matching", checks, failures)


def suite_cyclicize(seed: int = 2) -> dict:
    rng = np.random.default_rng(seed)
    checks, failures = 0, []
    for q in (2, 3, 4, 5):
        for image in itertools.permutations(range(q)):
            sigma = CellPermutation(np.asarray(image))
            tau, final = cyclicize(sigma, tuple(range(q)))
            checks += 1
            if cycle_type(final.image) != [q]:
                failures.append(f"exhaustive q={q} {image}: not a single cycle")
            elif displacement_along(tau.image, tuple(range(q))) > 2:
                failures.append(f"exhaustive q={q} {image}: tau moves too far")
            elif not np.array_equal(final.image, tau.image[sigma.image]):
                failures.append(f"exhaustive q={q} {image}: composition mismatch")
    for trial in range(60):
        q = int(rng.integers(6, 40))
        sigma = CellPermutation(rng.permutation(q))
        order = tuple(int(x) for x in rng.permutation(q))
        tau, final = cyclicize(sigma, order)
        checks += 1
        if cycle_type(final.image) != [q]:
            failures.append(f"random q={q} trial={trial}: not a single cycle")
        elif displacement_along(tau.image, order) > 2:
            failures.append(f"random q={q} trial={trial}: tau moves too far")
    return _suite_result("cyclicize", checks, failures)


def suite_bicyclize(seed: int = 3) -> dict:
    rng = np.random.default_rng(seed)
    checks, failures = 0, []
    for trial in range(80):
        q = int(2 ** rng.integers(2, 7))
        grid = DyadicGrid(1, int(math.log2(q)), "torus")
        sigma = CellPermutation(rng.permutation(q))
        order = snake_order(grid)
        _, cyc = cyclicize(sigma, order)
        pair = bicyclize(cyc, order)
        lens = cycle_type(pair.image)
        checks += 1
        if len(lens) != 2:
            failures.append(f"trial={trial} q={q}: {len(lens)} cycles")
        elif any(l % 2 == 0 for l in lens) or math.gcd(*lens) != 1 or sum(lens) != q:
            failures.append(f"trial={trial} q={q}: bad cycle pair {lens}")
    return _suite_result("bicyclize", checks, failures)


def suite_bezout(seed: int = 4) -> dict:
    from .errors import TooSmall

    rng = np.random.default_rng(seed)
    checks, failures = 0, []
    for trial in range(400):
        p = int(rng.integers(1, 30))
        qp = int(rng.integers(1, 30))
        if math.gcd(p, qp) != 1:
            continue
        k = int(rng.integers(p * qp, p * qp + 400))
        ref = exhaustive_bezout(k, p, qp)
        got = bezout_split(k, p, qp)
        checks += 1
        if ref != got:
            failures.append(f"k={k} p={p} qp={qp}: got {got}, reference {ref}")
        if k > p * qp:
            checks += 1
            try:
                bezout_split(int(rng.integers(0, p * qp)), p, qp)
                failures.append(f"p={p} qp={qp}: below-domain k not rejected")
            except TooSmall:
                pass
    return _suite_result("bezout", checks, failures)


def suite_towers(seed: int = 5) -> dict:
    rng = np.random.default_rng(seed)
    checks, failures = 0, []
    for trial in range(60):
        q = int(rng.integers(4, 30))
        sigma = CellPermutation(rng.permutation(q))
        h = int(rng.integers(1, 4))
        if min(cycle_type(sigma.image)) < h:
            continue
        tower = rokhlin_tower(sigma, h)
        levels = tower.levels()
        flat = [c for lv in levels for c in lv]
        checks += 1
        if len(flat) != len(set(flat)):
            failures.append(f"trial={trial}: tower levels overlap")
        elif Fraction(len(flat), q) != tower.coverage():
            failures.append(f"trial={trial}: coverage miscounted")
    for p, qp in ((2, 3), (3, 5), (2, 5)):
        for q in (p * qp, p * qp + 1, p * qp + 4, 2 * p * qp + 3):
            image = np.roll(np.arange(q), -1)
            sigma = CellPermutation(image)
            cols = two_column_partition(sigma, p, qp)
            flat = [c for c, _, _ in cols.all_levels()]
            checks += 1
            if sorted(flat) != list(range(q)):
                failures.append(f"(p,q')=({p},{qp}) q={q}: not an exact partition")
    return _suite_result("towers", checks, failures)


def suite_spectral(seed: int = 6) -> dict:
    rng = np.random.default_rng(seed)
    checks, failures = 0, []
    for trial in range(40):
        q = int(rng.integers(2, 20))
        image = rng.permutation(q)
        v = rng.standard_normal(q)
        ref = direct_spectral_weights(image, v)
        got = spectral_measure_of_vector(CellPermutation(image), v)
        checks += 1
        keys = set(ref) | set(got.atoms)
        bad = [
            k
            for k in keys
            if abs(ref.get(k, 0.0) - got.atoms.get(k, 0.0)) > 1e-9 * max(1.0, q)
        ]
        if bad:
            failures.append(f"trial={trial} q={q}: weights differ at {bad}")
    return _suite_result("spectral", checks, failures)


def suite_cesaro(seed: int = 7) -> dict:
    rng = np.random.default_rng(seed)
    checks, failures = 0, []
    for trial in range(40):
        q = int(rng.integers(2, 17))
        image = rng.permutation(q)
        sigma = CellPermutation(image)
        k1 = int(rng.integers(1, q + 1))
        k2 = int(rng.integers(1, q + 1))
        c1 = sorted(int(x) for x in rng.choice(q, size=k1, replace=False))
        c2 = sorted(int(x) for x in rng.choice(q, size=k2, replace=False))
        got = cesaro_mixing_diagnostic(sigma, c1, c2, q)
        ref = direct_cesaro(image, c1, c2, q)
        checks += 1
        if got != ref:
            failures.append(f"trial={trial}: averages differ")
    return _suite_result("cesaro", checks, failures)


def suite_overlap(seed: int = 8) -> dict:
    from .maps import cat_map, translation

    checks, failures = 0, []
    grid = DyadicGrid(2, 2, "torus")
    for map_, tol in (
        (translation([0.25, 0.5]), 0.0),
        (cat_map(), 0.02),
        (translation([0.3, 0.1]), 0.02),
    ):
        ov = overlap_matrix(map_, grid, s=8)
        ref = dense_overlap_weights(map_, grid, per_side=48)
        checks += 1
        if np.max(np.abs(ov.weights().toarray() - ref)) > tol + 1e-12:
            failures.append(f"{map_.describe()}: weights off by more than {tol}")
    return _suite_result("overlap", checks, failures)


ORACLE_SUITES = {
    "matching": suite_matching,
    "cyclicize": suite_cyclicize,
    "bicyclize": suite_bicyclize,
    "bezout": suite_bezout,
    "towers": suite_towers,
    "spectral": suite_spectral,
    "cesaro": suite_cesaro,
    "overlap": suite_overlap,
}


def run_oracle(name: str) -> dict:
    """Run one named suite, or all of them."""
    if name == "all":
        subs = [fn() for fn in ORACLE_SUITES.values()]
        return {
            "suite": "all",
            "checks": sum(s["checks"] for s in subs),
            "failures": [f for s in subs for f in s["failures"]],
            "passed": all(s["passed"] for s in subs),
            "suites": subs,
        }
    if name not in ORACLE_SUITES:
        from .errors import ConfigError

        raise ConfigError(
            f"unknown oracle suite {name!r}; choose from "
            f"{', '.join(sorted(ORACLE_SUITES))} or 'all'"
        )
    return ORACLE_SUITES[name]()
