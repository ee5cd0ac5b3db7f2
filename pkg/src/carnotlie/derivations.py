"""Derivations of a stratified algebra, and the isometric degree-zero part.

A derivation is found as an exact nullspace: the unknowns are matrix
entries ``U[l][k]`` (column ``k`` is the image of ``e_k``) and the equations
are the Leibniz rule on basis pairs ``i < j``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .algebra import StratifiedAlgebra, validate
from .linalg import Subspace, Vector, is_positive_definite, mat_mul, nullspace

Matrix = tuple[Vector, ...]


class InvalidAlgebraError(ValueError):
    """The algebra fails validation; carries the validation report."""

    def __init__(self, report: Sequence[str]):
        super().__init__("invalid stratified algebra: " + "; ".join(report))
        self.report = list(report)


class GramError(ValueError):
    pass


@dataclass(frozen=True)
class GradedMap:
    """A linear endomorphism of g with a declared degree.

    ``matrix[l][k]`` is the ``e_l`` coefficient of the image of ``e_k``.
    ``degree`` is ``None`` for maps of mixed degree.
    """

    degree: int | None
    matrix: Matrix

    def block(self, alg: StratifiedAlgebra, j: int) -> Matrix:
        """Block ``V_j -> V_{j+degree}`` (strata numbered from 1)."""
        if self.degree is None:
            raise ValueError("mixed-degree map has no blocks")
        t = j + self.degree
        if not 1 <= t <= alg.step:
            return ()
        rows, cols = alg.strata[t - 1], alg.strata[j - 1]
        return tuple(tuple(self.matrix[r][c] for c in cols) for r in rows)

    def blocks(self, alg: StratifiedAlgebra) -> dict[int, Matrix]:
        return {j: self.block(alg, j) for j in range(1, alg.step + 1)}

    def apply(self, v: Sequence[Fraction]) -> Vector:
        return tuple(
            sum((a * b for a, b in zip(row, v) if a and b), Fraction(0)) for row in self.matrix
        )

    def flat(self) -> Vector:
        return tuple(x for row in self.matrix for x in row)

    def commutator(self, other: "GradedMap") -> "GradedMap":
        ab = mat_mul(self.matrix, other.matrix)
        ba = mat_mul(other.matrix, self.matrix)
        deg = None
        if self.degree is not None and other.degree is not None:
            deg = self.degree + other.degree
        return GradedMap(deg, tuple(tuple(x - y for x, y in zip(r, s)) for r, s in zip(ab, ba)))


def leibniz_defects(alg: StratifiedAlgebra, u: GradedMap) -> list[tuple[int, int, Vector]]:
    """Basis pairs ``(i, j)`` where ``u[e_i,e_j] != [u e_i, e_j] + [e_i, u e_j]``."""
    n = alg.dim
    cols = [tuple(u.matrix[l][k] for l in range(n)) for k in range(n)]
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            lhs = [Fraction(0)] * n
            for k, v in alg.c(i, j).items():
                for l in range(n):
                    lhs[l] += v * cols[k][l]
            ei, ej = alg.basis_vector(i), alg.basis_vector(j)
            r1 = alg.bracket(cols[i], ej)
            r2 = alg.bracket(ei, cols[j])
            d = tuple(a - b - c for a, b, c in zip(lhs, r1, r2))
            if any(d):
                out.append((i, j, d))
    return out


def is_derivation(alg: StratifiedAlgebra, u: GradedMap) -> bool:
    return not leibniz_defects(alg, u)


def _leibniz_rows(alg: StratifiedAlgebra, var: dict[tuple[int, int], int]) -> list[dict[int, Fraction]]:
    n = alg.dim
    by_col: dict[int, list[int]] = {}
    for (l, k) in var:
        by_col.setdefault(k, []).append(l)
    rows = []
    for i in range(n):
        for j in range(i + 1, n):
            eq: dict[int, dict[int, Fraction]] = {}

            def add(l, v, c):
                row = eq.setdefault(l, {})
                row[v] = row.get(v, 0) + c

            # u[e_i, e_j]
            for k, c in alg.c(i, j).items():
                for l in by_col.get(k, ()):
                    add(l, var[(l, k)], c)
            # - [u e_i, e_j]
            for m in by_col.get(i, ()):
                for l, c in alg.c(m, j).items():
                    add(l, var[(m, i)], -c)
            # - [e_i, u e_j]
            for m in by_col.get(j, ()):
                for l, c in alg.c(i, m).items():
                    add(l, var[(m, j)], -c)
            for row in eq.values():
                row = {k: v for k, v in row.items() if v}
                if row:
                    rows.append(row)
    return rows


def _maps_from_solutions(
    alg: StratifiedAlgebra, var: dict[tuple[int, int], int], sols: Iterable[Vector], degree: int | None
) -> list[GradedMap]:
    n = alg.dim
    out = []
    for sol in sols:
        m = [[Fraction(0)] * n for _ in range(n)]
        for (l, k), idx in var.items():
            m[l][k] = sol[idx]
        out.append(GradedMap(degree, tuple(tuple(r) for r in m)))
    return out


def _require_valid(alg: StratifiedAlgebra) -> None:
    report = validate(alg)
    if report:
        raise InvalidAlgebraError(report)


def derivation_algebra(alg: StratifiedAlgebra) -> list[GradedMap]:
    """Basis of Der(g) as plain endomorphisms (degree ``None``)."""
    n = alg.dim
    var = {(l, k): l * n + k for l in range(n) for k in range(n)}
    sols = nullspace(_leibniz_rows(alg, var), len(var))
    return _maps_from_solutions(alg, var, sols, None)


def graded_derivations(alg: StratifiedAlgebra, degree: int = 0, check: bool = True) -> list[GradedMap]:
    """Basis of derivations mapping each ``V_j`` into ``V_{j+degree}``."""
    if check:
        _require_valid(alg)
    w = alg.weights
    n = alg.dim
    var: dict[tuple[int, int], int] = {}
    for k in range(n):
        for l in range(n):
            if w[l] == w[k] + degree:
                var[(l, k)] = len(var)
    sols = nullspace(_leibniz_rows(alg, var), len(var))
    return _maps_from_solutions(alg, var, sols, degree)


def strata_derivations(alg: StratifiedAlgebra, check: bool = True) -> list[GradedMap]:
    """Basis of Der_0(g): strata-preserving derivations."""
    return graded_derivations(alg, 0, check)


def check_gram(alg: StratifiedAlgebra, gram: Sequence[Sequence[Fraction]]) -> tuple[Vector, ...]:
    d1 = len(alg.strata[0])
    g = tuple(tuple(Fraction(x) for x in row) for row in gram)
    if len(g) != d1 or any(len(r) != d1 for r in g):
        raise GramError(f"Gram matrix must be {d1}x{d1}")
    if any(g[a][b] != g[b][a] for a in range(d1) for b in range(d1)):
        raise GramError("Gram matrix is not symmetric")
    if not is_positive_definite(g):
        raise GramError("Gram matrix is not positive definite")
    return g


def isometric_part(
    alg: StratifiedAlgebra, gram: Sequence[Sequence[Fraction]], check: bool = True
) -> list[GradedMap]:
    """Basis of g_0: elements of Der_0(g) whose V_1 block is skew for ``gram``."""
    g = check_gram(alg, gram)
    if check:
        _require_valid(alg)
    w = alg.weights
    n = alg.dim
    var: dict[tuple[int, int], int] = {}
    for k in range(n):
        for l in range(n):
            if w[l] == w[k]:
                var[(l, k)] = len(var)
    rows = _leibniz_rows(alg, var)
    v1 = alg.strata[0]
    d1 = len(v1)
    for a in range(d1):
        for b in range(a, d1):
            # (u^T G + G u)[a][b] = sum_p u[p][a] G[p][b] + G[a][p] u[p][b]
            row: dict[int, Fraction] = {}
            for p in range(d1):
                for key, coef in ((var[(v1[p], v1[a])], g[p][b]), (var[(v1[p], v1[b])], g[a][p])):
                    if coef:
                        row[key] = row.get(key, 0) + coef
            row = {k: v for k, v in row.items() if v}
            if row:
                rows.append(row)
    sols = nullspace(rows, len(var))
    basis = _maps_from_solutions(alg, var, sols, 0)
    if not is_closed(basis):
        raise ArithmeticError("isometric part is not closed under commutators")
    return basis


def span_of(maps: Sequence[GradedMap], n: int) -> Subspace:
    return Subspace.span([m.flat() for m in maps], n * n)


def is_closed(maps: Sequence[GradedMap]) -> bool:
    """Whether the span of ``maps`` is closed under commutators."""
    if not maps:
        return True
    n = len(maps[0].matrix)
    sp = span_of(maps, n)
    return all(
        sp.contains(a.commutator(b).flat())
        for i, a in enumerate(maps)
        for b in maps[i + 1:]
    )


def skew_defect(alg: StratifiedAlgebra, u: GradedMap, gram: Sequence[Sequence[Fraction]]) -> Matrix:
    """``u1^T G + G u1`` for the V_1 block ``u1``; zero exactly when u is skew."""
    u1 = u.block(alg, 1)
    ut = tuple(zip(*u1))
    a = mat_mul(ut, gram)
    b = mat_mul(gram, u1)
    return tuple(tuple(x + y for x, y in zip(r, s)) for r, s in zip(a, b))
