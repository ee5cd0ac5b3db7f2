"""Killing fields of a Carnot group as polynomial vector fields.

The algebra is assembled as ``K = g^dagger + K_0``: the dag fields of the
basis of g, followed by the linear fields ``x -> u x`` for ``u`` in g_0
(whose flows are one-parameter groups of isometric automorphisms).  The
construction is certified afterwards by bracket closure and contact checks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .algebra import StratifiedAlgebra
from .derivations import GradedMap
from .group_law import Certificate, dag_fields, left_fields
from .linalg import Subspace, Vector, inverse, nullspace, rank, solve
from .polynomial import Poly, PolyVectorField, coefficient_vectors, field_bracket
from .prolongation import ProlongationTower, bracket_table as prol_bracket_table


class FieldSpan:
    """Exact coordinates of polynomial fields in the span of a fixed list."""

    def __init__(self, fields: Sequence[PolyVectorField]):
        self.fields = list(fields)
        keys, vecs = coefficient_vectors(self.fields)
        self.keys = keys
        self._pos = {k: i for i, k in enumerate(keys)}
        n = len(keys)
        self.space = Subspace.span(vecs, n)
        # echelon row r = sum_a lift[r][a] * fields[a]
        cols = [[v.get(i, Fraction(0)) for v in vecs] for i in range(n)]
        self._lift = [solve(cols, list(row), len(vecs)) for row in self.space.basis]

    @property
    def independent(self) -> bool:
        return self.space.dim == len(self.fields)

    def _vector(self, f: PolyVectorField) -> list[Fraction] | None:
        v = [Fraction(0)] * len(self.keys)
        for i, p in enumerate(f.components):
            for m, c in p.terms.items():
                j = self._pos.get((i, m))
                if j is None:
                    return None
                v[j] = c
        return v

    def coordinates(self, f: PolyVectorField) -> Vector | None:
        v = self._vector(f)
        if v is None:
            return None
        ech = self.space.coordinates(v)
        if ech is None:
            return None
        out = [Fraction(0)] * len(self.fields)
        for c, lift in zip(ech, self._lift):
            if c:
                for a, x in enumerate(lift):
                    if x:
                        out[a] += c * x
        return tuple(out)

    def contains(self, f: PolyVectorField) -> bool:
        return self.coordinates(f) is not None


@dataclass
class KillingAlgebra:
    alg: StratifiedAlgebra
    g0: list[GradedMap]
    basis: list[PolyVectorField]
    bracket_table: dict[tuple[int, int], dict[int, Fraction]]
    span: FieldSpan = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def combination(self, coeffs: Sequence[Fraction]) -> PolyVectorField:
        n = self.alg.dim
        out = PolyVectorField.zero(n)
        for c, f in zip(coeffs, self.basis):
            if c:
                out = out + f * c
        return out

    def coordinates(self, f: PolyVectorField) -> Vector | None:
        return self.span.coordinates(f)

    def contains(self, f: PolyVectorField) -> bool:
        return self.span.contains(f)

    def bracket_coords(self, a: int, b: int) -> Vector:
        row = self.bracket_table.get((a, b), {})
        return tuple(row.get(k, Fraction(0)) for k in range(self.dim))


class NotClosedError(ArithmeticError):
    pass


def killing_basis(alg: StratifiedAlgebra, g0_basis: Sequence[GradedMap]) -> KillingAlgebra:
    fields = dag_fields(alg) + [PolyVectorField.linear(u.matrix) for u in g0_basis]
    span = FieldSpan(fields)
    if not span.independent:
        raise ArithmeticError("Killing basis fields are linearly dependent")
    table: dict[tuple[int, int], dict[int, Fraction]] = {}
    for a in range(len(fields)):
        for b in range(a + 1, len(fields)):
            br = field_bracket(fields[a], fields[b])
            if not br:
                continue
            coords = span.coordinates(br)
            if coords is None:
                raise NotClosedError(f"bracket of basis fields {a} and {b} leaves the span")
            row = {k: c for k, c in enumerate(coords) if c}
            if row:
                table[(a, b)] = row
                table[(b, a)] = {k: -c for k, c in row.items()}
    return KillingAlgebra(alg, list(g0_basis), fields, table, span)


def _value_at_origin(f: PolyVectorField) -> Vector:
    zero = (0,) * f.ambient_dim
    return tuple(p.terms.get(zero, Fraction(0)) for p in f.components)


def killing_filtration(K: KillingAlgebra, alg: StratifiedAlgebra | None = None, max_steps: int | None = None) -> list[Subspace]:
    """``[K_{-1}, K_0, K_1, ...]`` as subspaces of K-coordinates.

    Stops after the first zero term, or when the chain becomes stationary.
    """
    alg = alg or K.alg
    n = K.dim
    w = alg.weights
    values = [_value_at_origin(f) for f in K.basis]
    vert = [
        {a: values[a][i] for a in range(n) if values[a][i]}
        for i in range(alg.dim)
        if w[i] >= 2
    ]
    k_minus1 = Subspace.span(nullspace(vert, n), n)
    at_origin = [{a: values[a][i] for a in range(n) if values[a][i]} for i in range(alg.dim)]
    k0 = Subspace.span(nullspace(at_origin, n), n)
    chain = [k_minus1, k0]
    horizontal = alg.strata[0]
    # ad_i[r][a]: coordinate r of [basis_a, Y_i^dagger]
    ads = []
    for i in horizontal:
        cols = [K.bracket_coords(a, i) for a in range(n)]
        ads.append([[cols[a][r] for a in range(n)] for r in range(n)])
    limit = max_steps if max_steps is not None else 2 * alg.step + 4
    while chain[-1].dim and len(chain) < limit + 2:
        prev = chain[-1]
        ann = prev.annihilator()
        rows = [r for r in at_origin if r]
        for ad in ads:
            for nrow in ann:
                row = {}
                for a in range(n):
                    s = sum((nrow[r] * ad[r][a] for r in range(n) if nrow[r] and ad[r][a]), Fraction(0))
                    if s:
                        row[a] = s
                if row:
                    rows.append(row)
        nxt = Subspace.span(nullspace(rows, n), n) if rows else Subspace.full(n)
        chain.append(nxt)
        if nxt == prev:
            break
    return chain


@lru_cache(maxsize=64)
def _frame_inverse(alg: StratifiedAlgebra) -> tuple[tuple[Poly, ...], ...]:
    """Polynomial inverse of the left-invariant frame matrix F[i][k] = (e_k~)^i."""
    n = alg.dim
    frame = left_fields(alg)
    f = [[frame[k].components[i] for k in range(n)] for i in range(n)]
    one = Poly.constant(n, 1)
    # F = I + N with N nilpotent, so F^{-1} = sum (-N)^m
    nil = [[f[i][k] - (one if i == k else Poly(n)) for k in range(n)] for i in range(n)]
    neg = [[-x for x in row] for row in nil]
    term = [[one if i == k else Poly(n) for k in range(n)] for i in range(n)]
    total = [row[:] for row in term]
    for _ in range(alg.step + 1):
        term = _poly_matmul(term, neg)
        if not any(x for row in term for x in row):
            break
        total = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(total, term)]
    check = _poly_matmul(f, total)
    if any(check[i][k] != (one if i == k else Poly(n)) for i in range(n) for k in range(n)):
        raise ArithmeticError("left-invariant frame inverse failed")
    return tuple(tuple(r) for r in total)


def _poly_matmul(a, b):
    n = len(a)
    m = len(b[0])
    nv = a[0][0].nvars
    out = [[Poly(nv) for _ in range(m)] for _ in range(n)]
    for i in range(n):
        for k in range(len(b)):
            if a[i][k]:
                for j in range(m):
                    if b[k][j]:
                        out[i][j] = out[i][j] + a[i][k] * b[k][j]
    return out


def left_frame_coefficients(alg: StratifiedAlgebra, f: PolyVectorField) -> list[Poly]:
    """Polynomials ``c_k`` with ``f = sum_k c_k e_k~``."""
    inv = _frame_inverse(alg)
    n = alg.dim
    out = []
    for k in range(n):
        acc = Poly(n)
        for i in range(n):
            if inv[k][i] and f.components[i]:
                acc = acc + inv[k][i] * f.components[i]
        out.append(acc)
    return out


def contact_check(z: PolyVectorField, alg: StratifiedAlgebra) -> Certificate:
    """Whether ``[Z, X~_h]`` stays horizontal for every horizontal frame field."""
    frame = left_fields(alg)
    names = alg.basis_names
    w = alg.weights
    defects = []
    for h in alg.strata[0]:
        br = field_bracket(z, frame[h])
        coeffs = left_frame_coefficients(alg, br)
        for k, c in enumerate(coeffs):
            if w[k] >= 2 and c:
                defects.append(f"[Z, {names[h]}~] has {names[k]}~-coefficient {c.to_str()}")
    return Certificate(not defects, tuple(defects))


def push_forward(z: PolyVectorField, a, K: KillingAlgebra | None = None) -> PolyVectorField:
    """``(A_* Z)(x) = A Z(A^{-1} x)`` for a linear map ``A``.

    With ``K`` given, also verifies that the result is again in K.
    """
    m = tuple(tuple(Fraction(x) for x in row) for row in a)
    n = len(m)
    if z.ambient_dim != n:
        raise ValueError("dimension mismatch")
    try:
        ainv = inverse(m)
    except ValueError:
        raise ValueError("push-forward by a singular map") from None
    sub = [Poly.linear(row) for row in ainv]
    pulled = [p.substitute(sub) if p else Poly(n) for p in z.components]
    comps = []
    for i in range(n):
        acc = Poly(n)
        for j in range(n):
            if m[i][j] and pulled[j]:
                acc = acc + pulled[j] * m[i][j]
        comps.append(acc)
    out = PolyVectorField(comps)
    if K is not None and not K.contains(out):
        raise NotClosedError("push-forward leaves the Killing algebra")
    return out


def identification_defects(K: KillingAlgebra, tower: ProlongationTower) -> list[str]:
    """Compare K with Prol(g) under ``Y -> Y^dagger``, ``u -> (x -> u x)``.

    Both assignments reverse brackets, so K's structure constants must be the
    negatives of those of Prol(g).  Also compares filtration dimensions with
    the graded dimensions: ``dim K_j = sum_{i >= j} dim g_i``.
    """
    alg = tower.alg
    defects = []
    if tower.terminated_at is None:
        return [f"prolongation not certified finite ({tower.status})"]
    prol_basis = tower.all_basis()
    if len(prol_basis) != K.dim:
        defects.append(f"dim Prol(g) = {len(prol_basis)} but dim K = {K.dim}")
        return defects
    # Prol index -> K index
    to_k = []
    for d in range(-alg.step, tower.top_degree + 1):
        if d < 0:
            to_k.extend(alg.strata[-d - 1])
        elif d == 0:
            to_k.extend(alg.dim + t for t in range(tower.space_dim(0)))
        elif tower.space_dim(d):
            defects.append(f"g_{d} is nonzero; no polynomial realisation assembled")
            return defects
    ptable = prol_bracket_table(tower)
    for a in range(len(prol_basis)):
        for b in range(len(prol_basis)):
            expect = {to_k[k]: -c for k, c in ptable.get((a, b), {}).items()}
            got = K.bracket_table.get((to_k[a], to_k[b]), {})
            if expect != got:
                defects.append(f"bracket mismatch on Prol basis pair ({a},{b})")
    chain = killing_filtration(K)
    dims = tower.dims()
    for j, sub in zip(range(-1, len(chain) - 1), chain):
        expected = sum(v for d, v in dims.items() if d >= j)
        if sub.dim != expected:
            defects.append(f"dim K_{j} = {sub.dim} but sum of dim g_i (i >= {j}) = {expected}")
    return defects
