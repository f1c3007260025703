"""Planar twist maps and constructions built from them: moving finitely many
points along disjoint tracks with small uniform displacement, and realizing a
cell permutation as a composition of localized twists.

A twist rotates each circle around its center rigidly, by an angle that
depends only on the radius, so it preserves area; the rotation profile here
ramps from 0 up to pi, holds the plateau, and ramps back down to 0 at half
the nominal radius, outside of which the map is the identity exactly (the
output array is a copy of the input there, not a rotation by angle 0).  Two
points symmetric about the center at plateau radius are swapped, which is
the only fact the constructions below need.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import (
    DomainError,
    GridMismatch,
    PathsIntersect,
    PointsOnBoundary,
    UnsupportedGeometry,
)
from .grid import DyadicGrid, snake_order
from .lax import CellPermutation
from .maps import MeasureMap, composition, identity, twist


def _profile(rho):
    """Rotation angle at relative radius rho = r / R: linear ramp to pi on
    [0, 1/8], plateau pi on [1/8, 3/8], ramp back to 0 at 1/2, zero beyond."""
    rho = np.asarray(rho, dtype=float)
    up = 8.0 * math.pi * rho
    down = 4.0 * math.pi - 8.0 * math.pi * rho
    theta = np.where(rho <= 0.125, up, np.where(rho <= 0.375, math.pi, down))
    return np.where(rho < 0.5, theta, 0.0)


class TwistMap:
    """Area-preserving twist of the plane supported in the open disk of
    radius R/2 about `center`; points x, y with midpoint `center` and
    |x - y| = R/2 are swapped."""

    __slots__ = ("center", "radius", "sign")

    def __init__(self, center, radius, sign=1):
        cx, cy = float(center[0]), float(center[1])
        self.center = (cx, cy)
        self.radius = float(radius)
        if not self.radius > 0:
            raise DomainError(f"twist radius must be positive, got {radius}")
        self.sign = int(sign)
        if self.sign not in (-1, 1):
            raise DomainError(f"twist sign must be +1 or -1, got {sign}")

    def _displacements(self, P):
        return P - np.asarray(self.center)

    def eval(self, P):
        P = np.asarray(P, dtype=float)
        single = P.ndim == 1
        P = np.atleast_2d(P)
        if P.shape[1] != 2:
            raise DomainError(f"twist maps act on the plane, got dim {P.shape[1]}")
        d = self._displacements(P)
        r = np.hypot(d[:, 0], d[:, 1])
        out = P.copy()
        mask = r < 0.5 * self.radius
        if np.any(mask):
            theta = self.sign * _profile(r[mask] / self.radius)
            c, s = np.cos(theta), np.sin(theta)
            dx, dy = d[mask, 0], d[mask, 1]
            out[mask, 0] = self.center[0] + c * dx - s * dy
            out[mask, 1] = self.center[1] + s * dx + c * dy
        return out[0] if single else out

    def __call__(self, P):
        return self.eval(P)

    def inverse(self) -> "TwistMap":
        return TwistMap(self.center, self.radius, -self.sign)

    def __repr__(self):
        return f"TwistMap(center={self.center}, radius={self.radius}, sign={self.sign})"


class _TorusTwist:
    """Twist acting on the torus: displacements from the center are folded to
    the nearest periodic representative, and outputs are reduced mod 1.  Used
    when a twist's support disk must wrap across the unit-square boundary."""

    __slots__ = ("center", "radius", "sign")

    def __init__(self, center, radius, sign=1):
        self.center = (float(center[0]) % 1.0, float(center[1]) % 1.0)
        self.radius = float(radius)
        if not 0 < self.radius < 1:
            raise DomainError(f"torus twist radius must be in (0, 1), got {radius}")
        self.sign = int(sign)

    def eval(self, P):
        P = np.asarray(P, dtype=float)
        single = P.ndim == 1
        P = np.atleast_2d(P)
        d = P - np.asarray(self.center)
        d -= np.round(d)
        r = np.hypot(d[:, 0], d[:, 1])
        out = np.mod(P, 1.0)
        mask = r < 0.5 * self.radius
        if np.any(mask):
            theta = self.sign * _profile(r[mask] / self.radius)
            c, s = np.cos(theta), np.sin(theta)
            dx, dy = d[mask, 0], d[mask, 1]
            out[mask, 0] = np.mod(self.center[0] + c * dx - s * dy, 1.0)
            out[mask, 1] = np.mod(self.center[1] + s * dx + c * dy, 1.0)
        # np.mod maps tiny negatives to exactly 1.0; fold back into [0, 1)
        out[out >= 1.0] -= 1.0
        return out[0] if single else out

    def __call__(self, P):
        return self.eval(P)

    def inverse(self) -> "_TorusTwist":
        return _TorusTwist(self.center, self.radius, -self.sign)

    def __repr__(self):
        return f"_TorusTwist(center={self.center}, radius={self.radius}, sign={self.sign})"


def jacobian_check(map_like, pts, h: float = 1e-5) -> float:
    """Max |  |det J| - 1  | over the points, with J estimated by central
    finite differences of step h.  Accepts anything vectorized-callable on
    (N, 2) arrays (MeasureMap, TwistMap, ...)."""
    f = map_like.eval if hasattr(map_like, "eval") else map_like
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    ex = np.array([h, 0.0])
    ey = np.array([0.0, h])
    dfx = (f(pts + ex) - f(pts - ex)) / (2 * h)
    dfy = (f(pts + ey) - f(pts - ey)) / (2 * h)
    det = dfx[:, 0] * dfy[:, 1] - dfx[:, 1] * dfy[:, 0]
    return float(np.max(np.abs(np.abs(det) - 1.0)))


def _point_segment_distance(p, a, b):
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.hypot(*(p - a)))
    t = min(1.0, max(0.0, float((p - a) @ ab) / denom))
    return float(np.hypot(*(p - (a + t * ab))))


def _orient(a, b, c):
    v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return 0 if v == 0 else (1 if v > 0 else -1)


def _segments_cross(a, b, c, d) -> bool:
    o1, o2 = _orient(a, b, c), _orient(a, b, d)
    o3, o4 = _orient(c, d, a), _orient(c, d, b)
    if o1 != o2 and o3 != o4:
        return True
    return False


def segment_distance(a, b, c, d) -> float:
    """Euclidean distance between segments [a,b] and [c,d] (0 if they meet)."""
    a, b, c, d = (np.asarray(p, dtype=float) for p in (a, b, c, d))
    if _segments_cross(a, b, c, d):
        return 0.0
    return min(
        _point_segment_distance(c, a, b),
        _point_segment_distance(d, a, b),
        _point_segment_distance(a, c, d),
        _point_segment_distance(b, c, d),
    )


def _boundary_margin(a, b) -> float:
    vals = [a[0], b[0], a[1], b[1], 1 - a[0], 1 - b[0], 1 - a[1], 1 - b[1]]
    return float(min(vals))


def move_points(pairs, delta: float) -> MeasureMap:
    """Composition of twists carrying each source point to its target.

    `pairs` is a sequence of (source, target) planar points, all strictly
    inside the unit square; the straight tracks between sources and targets
    must be pairwise disjoint, and every track must be shorter than `delta`.
    Each track is walked in hops short enough that (a) a hop's twist disk
    stays inside the square, (b) disks of different tracks never meet, and
    (c) no point -- carried or bystander -- is displaced by delta or more.
    Returns the identity on the plane when there is nothing to move.
    """
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    segs = []
    for pair in pairs:
        x = np.asarray(pair[0], dtype=float)
        y = np.asarray(pair[1], dtype=float)
        if x.shape != (2,) or y.shape != (2,):
            raise DomainError("move_points expects pairs of planar points")
        for p in (x, y):
            if not (0 < p[0] < 1 and 0 < p[1] < 1):
                raise PointsOnBoundary(
                    f"point {tuple(p)} is not strictly inside the unit square"
                )
        segs.append((x, y))
    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            if segment_distance(*segs[i], *segs[j]) <= 0.0:
                raise PathsIntersect(f"tracks {i} and {j} touch or cross")
    gap = math.inf
    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            gap = min(gap, segment_distance(*segs[i], *segs[j]))
    twists = []
    for x, y in segs:
        L = float(np.hypot(*(y - x)))
        if L == 0.0:
            continue
        if L >= delta:
            raise DomainError(
                f"track of length {L} cannot be walked with displacement < {delta}"
            )
        margin = _boundary_margin(x, y)
        hop = min(gap / 4, delta / 4, (delta - L) / 3, L, margin / 2)
        k = max(1, math.ceil(L / hop))
        way = [x + (t / k) * (y - x) for t in range(k + 1)]
        for a, b in zip(way, way[1:]):
            step = float(np.hypot(*(b - a)))
            twists.append(TwistMap(0.5 * (a + b), 2.0 * step))
    if not twists:
        return identity(2)
    return composition([twist(t) for t in twists])


def permutation_twist_map(grid: DyadicGrid, sigma: CellPermutation) -> MeasureMap:
    """A composition of localized twists whose action on cell centers is
    exactly the cell permutation.

    The permutation is factored, by bubble sorting along the snake cycle,
    into transpositions of snake-adjacent cells; each transposition becomes
    one twist centered between the two cell centers, whose plateau swaps them
    while every other cell center sits outside the support disk and is fixed
    exactly.  On torus grids the twists wrap (supports near the boundary
    continue across it); on the cube the supports may overhang the square
    close to its edge.
    """
    if grid.dim != 2:
        raise UnsupportedGeometry(
            f"twist realizations are planar; grid has dim {grid.dim}"
        )
    if sigma.q != grid.q:
        raise GridMismatch(f"permutation of {sigma.q} cells on a grid of {grid.q}")
    snake = np.asarray(snake_order(grid), dtype=np.int64)
    centers = grid.centers()
    inv = np.argsort(sigma.image)
    target = [int(inv[c]) for c in snake]
    arr = [int(c) for c in snake]
    position = {c: p for p, c in enumerate(arr)}
    swaps = []
    for p in range(len(arr)):
        j = position[target[p]]
        while j > p:
            a, b = arr[j - 1], arr[j]
            arr[j - 1], arr[j] = b, a
            position[a], position[b] = j, j - 1
            swaps.append(j - 1)
            j -= 1
    torus = grid.topology == "torus"
    factors = []
    for p in swaps:
        c1 = centers[snake[p]]
        c2 = centers[snake[p + 1]]
        d = c2 - c1
        if torus:
            d = d - np.round(d)
            mid = np.mod(c1 + 0.5 * d, 1.0)
            dist = float(np.hypot(*d))
            factors.append(twist(_TorusTwist(mid, 2.0 * dist)))
        else:
            dist = float(np.hypot(*d))
            factors.append(twist(TwistMap(0.5 * (c1 + c2), 2.0 * dist)))
    if not factors:
        return identity(2)
    return composition(factors)
