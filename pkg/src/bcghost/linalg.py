"""Exact rational linear algebra: dense solves for small systems and an
incremental sparse eliminator for the gauge-condition systems."""

from __future__ import annotations

import heapq
from fractions import Fraction
from typing import Mapping, Sequence


def rref(rows: Sequence[Sequence[Fraction]], ncols: int):
    """Reduced row echelon form; returns (rows, pivot columns)."""
    m = [[Fraction(x) for x in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Basis of {x : A x = 0}, one vector per free column (free entry 1)."""
    red, pivots = rref(rows, ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in set(pivots)]
    out = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, pc in zip(red, pivots):
            x[pc] = -row[f]
        out.append(x)
    return out


def solve(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction], ncols: int):
    """One solution of A x = b (free variables 0), or None if inconsistent."""
    aug = [list(r) + [Fraction(b)] for r, b in zip(rows, rhs)]
    red, pivots = rref(aug, ncols + 1)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for row, pc in zip(red, pivots):
        x[pc] = row[ncols]
    return x


def det(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant by fraction-exact elimination (empty matrix -> 1)."""
    m = [[Fraction(x) for x in r] for r in matrix]
    n = len(m)
    sign = 1
    out = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c]), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            sign = -sign
        piv = m[c][c]
        out *= piv
        for i in range(c + 1, n):
            if m[i][c]:
                f = m[i][c] / piv
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return out if sign > 0 else -out


class SparseEliminator:
    """Incremental Gaussian elimination over Q on sparse rows.

    Columns are integers; each stored pivot row has its pivot as its
    smallest column, so reduction only ever moves towards larger columns.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.pivots: dict[int, dict[int, Fraction]] = {}

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row: Mapping[int, Fraction]) -> dict[int, Fraction]:
        row = {c: Fraction(v) for c, v in row.items() if v}
        heap = list(row)
        heapq.heapify(heap)
        seen = set()
        while heap:
            c = heapq.heappop(heap)
            if c in seen:
                continue
            seen.add(c)
            v = row.get(c)
            if not v:
                continue
            prow = self.pivots.get(c)
            if prow is None:
                continue
            for k, w in prow.items():
                nv = row.get(k, 0) - v * w
                if nv:
                    if k not in row and k not in seen:
                        heapq.heappush(heap, k)
                    row[k] = nv
                else:
                    row.pop(k, None)
        return row

    def add_row(self, row: Mapping[int, Fraction]) -> bool:
        """Insert a row; returns False if it was dependent on earlier rows."""
        r = self.reduce(row)
        if not r:
            return False
        c = min(r)
        inv = 1 / r[c]
        self.pivots[c] = {k: v * inv for k, v in r.items()}
        return True

    def free_columns(self) -> list[int]:
        return [c for c in range(self.ncols) if c not in self.pivots]

    def kernel(self) -> list[dict[int, Fraction]]:
        """Kernel basis: one vector per free column, by back substitution."""
        out = []
        order = sorted(self.pivots, reverse=True)
        for f in self.free_columns():
            x = {f: Fraction(1)}
            for pc in order:
                s = Fraction(0)
                for k, w in self.pivots[pc].items():
                    if k != pc and k in x:
                        s += w * x[k]
                if s:
                    x[pc] = -s
            out.append(x)
        return out
