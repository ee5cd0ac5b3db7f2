"""Exact rational linear algebra: RREF, nullspaces and canonical subspaces.

All routines work on :class:`fractions.Fraction` entries.  Rows may be given
dense (sequences) or sparse (``{column: value}`` dicts).  Reduction is
delegated to the compiled int64 kernel when it is importable and falls back
to the bigint pure-Python kernel otherwise (or on overflow).
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Sequence

from . import _kernels_py

try:
    if os.environ.get("CARNOTLIE_PURE_PYTHON"):
        raise ImportError
    from . import _kernels as _kernels_c
except ImportError:
    _kernels_c = None

BACKEND = "cython" if _kernels_c is not None else "python"

_INT64_SAFE = 1 << 62

Row = Sequence[Fraction] | Mapping[int, Fraction]
Vector = tuple[Fraction, ...]


def _row_items(row: Row):
    if isinstance(row, Mapping):
        return row.items()
    return enumerate(row)


def _integer_rows(rows: Iterable[Row]) -> tuple[list[dict[int, int]], int]:
    out = []
    biggest = 0
    for row in rows:
        items = [(c, Fraction(v)) for c, v in _row_items(row) if v]
        if not items:
            continue
        scale = lcm(*(v.denominator for _, v in items))
        d = {c: int(v * scale) for c, v in items}
        biggest = max(biggest, max(abs(v) for v in d.values()))
        out.append(d)
    return out, biggest


def rref_int(int_rows: list[dict[int, int]], ncols: int, backend: str | None = None):
    """Run the integer RREF kernel; ``backend`` forces ``"python"`` or ``"cython"``."""
    backend = backend or BACKEND
    if backend == "cython":
        if _kernels_c is None:
            raise RuntimeError("compiled kernel not available")
        dense = []
        for d in int_rows:
            r = [0] * ncols
            for c, v in d.items():
                r[c] = v
            dense.append(r)
        try:
            return _kernels_c.rref_int(dense, ncols)
        except OverflowError:
            pass
    return _kernels_py.rref_int(int_rows, ncols)


def rref(rows: Iterable[Row], ncols: int) -> tuple[list[Vector], list[int]]:
    """Reduced row echelon form with unit pivots; zero rows dropped."""
    int_rows, biggest = _integer_rows(rows)
    backend = None if biggest < _INT64_SAFE else "python"
    reduced, pivots = rref_int(int_rows, ncols, backend)
    out = []
    for r, p in zip(reduced, pivots):
        piv = r[p]
        out.append(tuple(Fraction(v, piv) for v in r))
    return out, list(pivots)


def rank(rows: Iterable[Row], ncols: int) -> int:
    return len(rref(rows, ncols)[1])


def nullspace(rows: Iterable[Row], ncols: int) -> list[Vector]:
    """Basis of ``{x : A x = 0}``, one vector per free column (that entry 1)."""
    reduced, pivots = rref(rows, ncols)
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, p in zip(reduced, pivots):
            if r[f]:
                v[p] = -r[f]
        basis.append(tuple(v))
    return basis


def solve(rows: Sequence[Row], rhs: Sequence[Fraction], ncols: int) -> Vector | None:
    """One solution of ``A x = b`` (free variables zero), or ``None``."""
    aug = []
    for row, b in zip(rows, rhs):
        d = {c: Fraction(v) for c, v in _row_items(row) if v}
        if b:
            d[ncols] = Fraction(b)
        aug.append(d)
    reduced, pivots = rref(aug, ncols + 1)
    if pivots and pivots[-1] == ncols:
        return None
    x = [Fraction(0)] * ncols
    for r, p in zip(reduced, pivots):
        x[p] = r[ncols]
    return tuple(x)


def mat_vec(m: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> Vector:
    return tuple(sum((a * b for a, b in zip(row, v) if a and b), Fraction(0)) for row in m)


def mat_mul(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> tuple[Vector, ...]:
    bt = list(zip(*b))
    return tuple(tuple(sum((x * y for x, y in zip(row, col) if x and y), Fraction(0)) for col in bt) for row in a)


def transpose(m: Sequence[Sequence[Fraction]]) -> tuple[Vector, ...]:
    return tuple(tuple(c) for c in zip(*m))


def identity(n: int) -> tuple[Vector, ...]:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def inverse(m: Sequence[Sequence[Fraction]]) -> tuple[Vector, ...]:
    """Exact inverse; raises ``ValueError`` if singular."""
    n = len(m)
    aug = [list(m[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    reduced, pivots = rref(aug, 2 * n)
    if pivots[:n] != list(range(n)) or len(pivots) != n:
        raise ValueError("matrix is singular")
    return tuple(tuple(r[n:]) for r in reduced)


def leading_minors(m: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    """Leading principal minors, computed exactly by elimination."""
    n = len(m)
    a = [[Fraction(x) for x in row] for row in m]
    minors = []
    det = Fraction(1)
    for k in range(n):
        piv = a[k][k]
        if piv == 0:
            # zero leading minor: the remaining ones are computed directly
            minors.append(Fraction(0))
            for j in range(k + 1, n):
                minors.append(_det([row[: j + 1] for row in m[: j + 1]]))
            return minors
        det *= piv
        minors.append(det)
        for i in range(k + 1, n):
            f = a[i][k] / piv
            if f:
                for j in range(k, n):
                    a[i][j] -= f * a[k][j]
    return minors


def _det(m: Sequence[Sequence[Fraction]]) -> Fraction:
    a = [[Fraction(x) for x in row] for row in m]
    n = len(a)
    det = Fraction(1)
    for k in range(n):
        p = next((i for i in range(k, n) if a[i][k]), None)
        if p is None:
            return Fraction(0)
        if p != k:
            a[k], a[p] = a[p], a[k]
            det = -det
        det *= a[k][k]
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            if f:
                for j in range(k, n):
                    a[i][j] -= f * a[k][j]
    return det


def is_positive_definite(m: Sequence[Sequence[Fraction]]) -> bool:
    n = len(m)
    if any(m[i][j] != m[j][i] for i in range(n) for j in range(n)):
        return False
    return all(x > 0 for x in leading_minors(m))


@dataclass(frozen=True)
class Subspace:
    """A linear subspace of ``Q^n`` in canonical (reduced echelon) form.

    ``basis`` holds the spanning vectors as the nonzero rows of the reduced
    row echelon form of any spanning set, i.e. the columns of the reduced
    column echelon form.  Equal subspaces therefore compare equal.
    """

    ambient_dim: int
    basis: tuple[Vector, ...]
    pivots: tuple[int, ...]

    @classmethod
    def span(cls, vectors: Iterable[Row], ambient_dim: int) -> "Subspace":
        reduced, pivots = rref(vectors, ambient_dim)
        return cls(ambient_dim, tuple(reduced), tuple(pivots))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, (), ())

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, identity(n), tuple(range(n)))

    @classmethod
    def coordinate(cls, indices: Iterable[int], n: int) -> "Subspace":
        idx = sorted(set(indices))
        basis = tuple(tuple(Fraction(int(j == i)) for j in range(n)) for i in idx)
        return cls(n, basis, tuple(idx))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coordinates(self, v: Sequence[Fraction]) -> Vector | None:
        """Coefficients of ``v`` in ``basis``, or ``None`` if ``v`` is outside."""
        coeffs = tuple(Fraction(v[p]) for p in self.pivots)
        rest = [Fraction(x) for x in v]
        for c, b in zip(coeffs, self.basis):
            if c:
                for j, bj in enumerate(b):
                    if bj:
                        rest[j] -= c * bj
        if any(rest):
            return None
        return coeffs

    def contains(self, v: Sequence[Fraction]) -> bool:
        return self.coordinates(v) is not None

    def __contains__(self, v) -> bool:
        return self.contains(v)

    def issubspace(self, other: "Subspace") -> bool:
        return all(other.contains(b) for b in self.basis)

    def __add__(self, other: "Subspace") -> "Subspace":
        return Subspace.span(self.basis + other.basis, self.ambient_dim)

    def intersection(self, other: "Subspace") -> "Subspace":
        # solve sum a_i u_i - sum b_j w_j = 0
        cols = list(self.basis) + [tuple(-x for x in w) for w in other.basis]
        if not cols:
            return Subspace.zero(self.ambient_dim)
        rows = transpose(cols)
        vecs = []
        for sol in nullspace(rows, len(cols)):
            v = [Fraction(0)] * self.ambient_dim
            for a, u in zip(sol[: self.dim], self.basis):
                if a:
                    for j, uj in enumerate(u):
                        v[j] += a * uj
            vecs.append(v)
        return Subspace.span(vecs, self.ambient_dim)

    def annihilator(self) -> list[Vector]:
        """Rows ``n`` with ``n . v = 0`` for all ``v`` in the subspace."""
        if not self.basis:
            return list(identity(self.ambient_dim))
        return nullspace(self.basis, self.ambient_dim)
