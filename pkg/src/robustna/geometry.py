"""Exact convex geometry on finite point sets in R^d.

Every yes/no answer here is decided in rational arithmetic.  Floats only
appear in :func:`inradius`, which takes the square root of an exact value.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, LPResult, solve_lp

__all__ = [
    "AffineHull",
    "Facet",
    "LPResult",
    "Point",
    "RelintCertificate",
    "affine_hull",
    "conv_membership",
    "dot",
    "facets",
    "inradius",
    "inradius_sq",
    "linear_span",
    "origin_in_relative_interior",
    "point",
    "point_set",
    "solve_lp",
    "INFEASIBLE",
    "OPTIMAL",
    "UNBOUNDED",
]

Point = tuple[Fraction, ...]

# Inradius convention for the degenerate support {0}: beta = eps/2 = 1.
DEGENERATE_EPSILON = 2


def point(coords: Iterable) -> Point:
    return tuple(Fraction(c) for c in coords)


def point_set(points: Iterable[Iterable]) -> tuple[Point, ...]:
    """Deduplicate by exact equality, keeping first-seen order."""
    seen: dict[Point, None] = {}
    dim = None
    for p in points:
        q = point(p)
        if dim is None:
            dim = len(q)
        elif len(q) != dim:
            raise ValueError(f"dimension mismatch: {len(q)} != {dim}")
        seen.setdefault(q, None)
    return tuple(seen)


def dot(u: Sequence, v: Sequence):
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def _sub(u: Point, v: Point) -> Point:
    return tuple(a - b for a, b in zip(u, v))


def rref(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; returns (non-zero rows, pivot columns)."""
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        sel = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if sel is None:
            continue
        m[r], m[sel] = m[sel], m[r]
        pv = m[r][col]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[list[Fraction]]:
    red, pivots = rref(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def linear_span(points: Sequence[Point]) -> list[Point]:
    """RREF basis of the linear span; coordinates of a span member are its pivot entries."""
    red, _ = rref([p for p in points])
    return [tuple(r) for r in red]


@dataclass(frozen=True)
class AffineHull:
    base: Point
    basis: tuple[Point, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, x: Sequence) -> bool:
        diff = _sub(point(x), self.base)
        red, _ = rref(list(self.basis) + [diff])
        return len(red) == self.dim


def affine_hull(ps: Iterable[Iterable]) -> AffineHull:
    pts = point_set(ps)
    if not pts:
        raise ValueError("empty point set")
    base = pts[0]
    basis = linear_span([_sub(p, base) for p in pts[1:]]) if len(pts) > 1 else []
    return AffineHull(base, tuple(basis))


@dataclass(frozen=True)
class RelintCertificate:
    """Outcome of the relative-interior test.

    Exactly one of ``weights`` (strictly positive, summing to one, with
    ``sum(w_i p_i) == 0``) or ``direction`` (``h.p >= 0`` for all points,
    ``> 0`` for some, ``h`` in the linear span) is set.
    """

    interior: bool
    points: tuple[Point, ...]
    weights: tuple[Fraction, ...] | None = None
    direction: Point | None = None

    def __bool__(self) -> bool:
        return self.interior

    def verify(self) -> bool:
        if self.interior:
            w = self.weights
            if w is None or self.direction is not None:
                return False
            d = len(self.points[0])
            combo = [sum((wi * p[k] for wi, p in zip(w, self.points)), Fraction(0)) for k in range(d)]
            return all(x > 0 for x in w) and sum(w) == 1 and all(c == 0 for c in combo)
        h = self.direction
        if h is None or self.weights is not None:
            return False
        vals = [dot(h, p) for p in self.points]
        in_span = len(rref(linear_span(self.points) + [list(h)])[0]) == len(linear_span(self.points))
        return all(v >= 0 for v in vals) and any(v > 0 for v in vals) and in_span


def _relint_weights(pts: tuple[Point, ...]) -> tuple[Fraction, ...] | None:
    # variables: lambda_1..lambda_m, t ;  max t  s.t. t - lambda_i <= 0,
    # sum lambda = 1, sum lambda_i p_i = 0.
    m, d = len(pts), len(pts[0])
    c = [0] * m + [1]
    A_ub = []
    for i in range(m):
        row = [0] * (m + 1)
        row[i] = -1
        row[m] = 1
        A_ub.append(row)
    A_eq = [[1] * m + [0]]
    b_eq = [1]
    for k in range(d):
        A_eq.append([p[k] for p in pts] + [0])
        b_eq.append(0)
    res = solve_lp(c, A_ub, [0] * m, A_eq, b_eq)
    if res.status != OPTIMAL or res.objective <= 0:
        return None
    return res.solution[:m]


def _separating_direction(pts: tuple[Point, ...]) -> Point | None:
    basis = linear_span(pts)
    k = len(basis)
    if k == 0:
        return None
    coords = [[dot(b, p) for b in basis] for p in pts]
    # z in [-1, 1]^k written as w - 1 with w in [0, 2]^k.
    c = [sum(row[i] for row in coords) for i in range(k)]
    A_ub, b_ub = [], []
    for row in coords:
        A_ub.append([-x for x in row])
        b_ub.append(-sum(row))
    for i in range(k):
        e = [0] * k
        e[i] = 1
        A_ub.append(e)
        b_ub.append(2)
    res = solve_lp(c, A_ub, b_ub)
    if res.status != OPTIMAL:
        return None
    z = [w - 1 for w in res.solution]
    h = tuple(sum((zi * b[j] for zi, b in zip(z, basis)), Fraction(0)) for j in range(len(pts[0])))
    if not any(dot(h, p) > 0 for p in pts):
        return None
    return h


def origin_in_relative_interior(ps: Iterable[Iterable]) -> RelintCertificate:
    """Decide ``0 in Ri(Conv(ps))`` and attach a checkable certificate."""
    pts = point_set(ps)
    if not pts:
        raise ValueError("empty point set")
    weights = _relint_weights(pts)
    if weights is not None:
        return RelintCertificate(True, pts, weights=weights)
    h = _separating_direction(pts)
    if h is None:
        raise ArithmeticError("relative-interior LP and separation LP disagree")
    return RelintCertificate(False, pts, direction=h)


@dataclass(frozen=True)
class Facet:
    """Supporting hyperplane ``{x in L : normal.x = offset}`` of a full-dimensional hull in L."""

    normal: Point
    offset: Fraction

    @property
    def distance_sq(self) -> Fraction:
        return self.offset * self.offset / dot(self.normal, self.normal)


def facets(ps: Iterable[Iterable]) -> list[Facet] | None:
    """Facets of Conv(ps) inside its linear span L, oriented so that ``normal.p <= offset``.

    Brute force over affinely independent subsets of size dim(L).  Returns
    None when Conv(ps) is not full-dimensional in L (i.e. 0 is not in Aff).
    """
    pts = point_set(ps)
    if not pts:
        raise ValueError("empty point set")
    basis = linear_span(pts)
    k = len(basis)
    if k == 0:
        return []
    if affine_hull(pts).dim < k:
        return None
    proj = [tuple(dot(b, p) for b in basis) for p in pts]
    out: dict[tuple, Facet] = {}
    for subset in itertools.combinations(range(len(pts)), k):
        z0 = proj[subset[0]]
        diffs = [[a - b for a, b in zip(proj[i], z0)] for i in subset[1:]]
        null = nullspace(diffs, k)
        if len(null) != 1:
            continue
        a = null[0]
        c = dot(a, z0)
        vals = [dot(a, z) for z in proj]
        if all(v <= c for v in vals):
            pass
        elif all(v >= c for v in vals):
            a = [-x for x in a]
            c = -c
        else:
            continue
        normal = tuple(sum((ai * b[j] for ai, b in zip(a, basis)), Fraction(0)) for j in range(len(pts[0])))
        key = _normalised_key(normal, c)
        out.setdefault(key, Facet(normal, c))
    return list(out.values())


def _normalised_key(normal: Point, offset: Fraction) -> tuple:
    pivot = next(x for x in normal if x != 0)
    s = abs(pivot)
    return tuple(x / s for x in normal) + (offset / s,)


def inradius_sq(ps: Iterable[Iterable]) -> Fraction:
    """Exact square of the largest eps with B(0, eps) ∩ L ⊆ Conv(ps).

    The degenerate support {0} returns ``DEGENERATE_EPSILON ** 2``.
    """
    pts = point_set(ps)
    fs = facets(pts)
    if fs is None or any(f.offset <= 0 for f in fs):
        raise ValueError("origin not in relative interior")
    if not fs:
        return Fraction(DEGENERATE_EPSILON) ** 2
    return min(f.distance_sq for f in fs)


def inradius(ps: Iterable[Iterable]) -> float:
    return math.sqrt(inradius_sq(ps))


def origin_interior_by_facets(ps: Iterable[Iterable]) -> bool:
    """Relative-interior test via facet enumeration; independent of the LP route."""
    fs = facets(ps)
    return fs is not None and all(f.offset > 0 for f in fs)


def conv_membership(x: Iterable, ps: Iterable[Iterable]) -> bool:
    pts = point_set(ps)
    xp = point(x)
    if not pts:
        raise ValueError("empty point set")
    if len(xp) != len(pts[0]):
        raise ValueError(f"dimension mismatch: {len(xp)} != {len(pts[0])}")
    m = len(pts)
    A_eq = [[1] * m] + [[p[k] for p in pts] for k in range(len(xp))]
    b_eq = [1] + list(xp)
    return solve_lp([0] * m, A_eq=A_eq, b_eq=b_eq).status == OPTIMAL
