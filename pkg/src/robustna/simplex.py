"""Exact two-phase simplex over the rationals.

Solves ``max c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0`` with
Bland's rule, so the pivot sequence (and therefore every certificate) is a
deterministic function of the input.  Arithmetic is done with ``gmpy2.mpq``;
inputs and outputs are :class:`fractions.Fraction`.

Certificate conventions (``y`` is indexed like the ub rows followed by the
eq rows):

* ``optimal``: dual solution with ``y_ub >= 0``, ``A^T y >= c`` and
  ``b.y == c.x``.
* ``infeasible``: Farkas vector with ``y_ub >= 0``, ``A^T y >= 0`` and
  ``b.y < 0``.
* ``unbounded``: a ray ``r >= 0`` with ``A_ub r <= 0``, ``A_eq r == 0`` and
  ``c.r > 0``; ``solution`` then holds a feasible point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from gmpy2 import mpq

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: str
    solution: tuple[Fraction, ...] = ()
    certificate: tuple[Fraction, ...] = ()
    objective: Fraction | None = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


class _Tableau:
    def __init__(self, n, rows, rhs, basis, idcols, signs, artificial):
        self.n = n
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.idcols = idcols
        self.signs = signs
        self.artificial = artificial
        self.obj: dict[int, mpq] = {}
        self.value = mpq(0)
        self.cost: dict[int, mpq] = {}

    def set_cost(self, cost: dict[int, mpq]) -> None:
        self.cost = cost
        obj = {j: v for j, v in cost.items() if v}
        value = mpq(0)
        for i, b in enumerate(self.basis):
            cb = cost.get(b)
            if not cb:
                continue
            for j, a in self.rows[i].items():
                v = obj.get(j, 0) - cb * a
                if v:
                    obj[j] = v
                else:
                    obj.pop(j, None)
            value += cb * self.rhs[i]
        self.obj = obj
        self.value = value

    def pivot(self, i: int, j: int) -> None:
        row = self.rows[i]
        piv = row[j]
        if piv != 1:
            row = {k: v / piv for k, v in row.items()}
            self.rows[i] = row
            self.rhs[i] = self.rhs[i] / piv
        rhs_i = self.rhs[i]
        for k, other in enumerate(self.rows):
            if k == i:
                continue
            f = other.get(j)
            if not f:
                continue
            for col, v in row.items():
                nv = other.get(col, 0) - f * v
                if nv:
                    other[col] = nv
                else:
                    other.pop(col, None)
            self.rhs[k] -= f * rhs_i
        f = self.obj.get(j)
        if f:
            for col, v in row.items():
                nv = self.obj.get(col, 0) - f * v
                if nv:
                    self.obj[col] = nv
                else:
                    self.obj.pop(col, None)
            self.value += f * rhs_i
        self.basis[i] = j

    def run(self, allowed) -> int | None:
        """Iterate to optimality; return an unbounded entering column or None."""
        while True:
            candidates = [j for j, v in self.obj.items() if v > 0 and allowed(j)]
            if not candidates:
                return None
            j = min(candidates)
            best = None
            for i, row in enumerate(self.rows):
                a = row.get(j)
                if a is None or a <= 0:
                    continue
                ratio = self.rhs[i] / a
                key = (ratio, self.basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
            if best is None:
                return j
            self.pivot(best[1], j)

    def duals(self) -> list[mpq]:
        out = []
        for i, col in enumerate(self.idcols):
            y = self.cost.get(col, 0) - self.obj.get(col, 0)
            out.append(self.signs[i] * y)
        return out

    def point(self) -> list[mpq]:
        x = [mpq(0)] * self.n
        for i, b in enumerate(self.basis):
            if b < self.n:
                x[b] = self.rhs[i]
        return x


def _check_shape(c, A, b, label):
    if len(A) != len(b):
        raise ValueError(f"malformed constraints: {len(A)} {label} rows but {len(b)} right-hand sides")
    for k, row in enumerate(A):
        if len(row) != len(c):
            raise ValueError(
                f"malformed constraints: {label} row {k} has {len(row)} coefficients, expected {len(c)}"
            )


def solve_lp(
    c: Sequence,
    A_ub: Sequence[Sequence] = (),
    b_ub: Sequence = (),
    A_eq: Sequence[Sequence] = (),
    b_eq: Sequence = (),
) -> LPResult:
    """Maximise ``c.x`` over the polyhedron described above (``x >= 0``)."""
    _check_shape(c, A_ub, b_ub, "ub")
    _check_shape(c, A_eq, b_eq, "eq")
    n = len(c)
    m_ub = len(A_ub)
    rows: list[dict[int, mpq]] = []
    rhs: list[mpq] = []
    basis: list[int] = []
    idcols: list[int] = []
    signs: list[int] = []
    artificial: set[int] = set()
    next_col = n + m_ub
    for k, (coeffs, b) in enumerate(list(zip(A_ub, b_ub)) + list(zip(A_eq, b_eq))):
        row = {j: mpq(a) for j, a in enumerate(coeffs) if a}
        b = mpq(b)
        is_ub = k < m_ub
        if is_ub:
            row[n + k] = mpq(1)
        sign = 1
        if b < 0:
            row = {j: -v for j, v in row.items()}
            b = -b
            sign = -1
        if is_ub and sign == 1:
            basic = n + k
        else:
            basic = next_col
            next_col += 1
            row[basic] = mpq(1)
            artificial.add(basic)
        rows.append(row)
        rhs.append(b)
        basis.append(basic)
        idcols.append(basic)
        signs.append(sign)

    tab = _Tableau(n, rows, rhs, basis, idcols, signs, artificial)

    if artificial:
        tab.set_cost({a: mpq(-1) for a in artificial})
        tab.run(lambda j: True)
        if tab.value < 0:
            return LPResult(INFEASIBLE, certificate=tuple(_frac(y) for y in tab.duals()))
        for i in range(len(tab.rows)):
            if tab.basis[i] in artificial:
                cols = [j for j in tab.rows[i] if j not in artificial]
                if cols:
                    tab.pivot(i, min(cols))

    tab.set_cost({j: mpq(v) for j, v in enumerate(c) if v})
    entering = tab.run(lambda j: j not in artificial)
    x = tab.point()
    if entering is not None:
        ray = [mpq(0)] * n
        if entering < n:
            ray[entering] = mpq(1)
        for i, b in enumerate(tab.basis):
            if b < n:
                ray[b] = -tab.rows[i].get(entering, 0)
        return LPResult(
            UNBOUNDED,
            solution=tuple(_frac(v) for v in x),
            certificate=tuple(_frac(v) for v in ray),
        )
    return LPResult(
        OPTIMAL,
        solution=tuple(_frac(v) for v in x),
        certificate=tuple(_frac(y) for y in tab.duals()),
        objective=_frac(tab.value),
    )
