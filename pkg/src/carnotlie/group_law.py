"""The Carnot group in exponential coordinates of the first kind.

Points are coordinate vectors ``x`` standing for ``exp(sum x_i e_i)``.  The
product is the Baker-Campbell-Hausdorff series in Dynkin's form, which is a
finite sum for a nilpotent algebra.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import factorial
from typing import Sequence

from .algebra import StratifiedAlgebra, bracket_vec
from .linalg import Vector, inverse, mat_mul, mat_vec
from .polynomial import Poly, PolyVectorField

Matrix = tuple[Vector, ...]


class NotAutomorphismError(ValueError):
    def __init__(self, message: str, pair: tuple[str, str] | None = None):
        super().__init__(message)
        self.pair = pair


@dataclass(frozen=True)
class Certificate:
    """Outcome of a check together with human-readable evidence."""

    ok: bool
    details: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


@lru_cache(maxsize=None)
def dynkin_words(step: int) -> tuple[tuple[str, Fraction], ...]:
    """Coefficients of right-nested brackets of X/Y words in log(e^X e^Y).

    Only words of length ``<= step`` are kept; words whose nested bracket
    vanishes identically (length >= 2 ending in a repeated letter) are dropped.
    """
    coeff: dict[str, Fraction] = {}
    for n in range(1, step + 1):
        sign = Fraction((-1) ** (n - 1), n)
        pairs = [(r, s) for r in range(step + 1) for s in range(step + 1) if 0 < r + s <= step]
        for seq in product(pairs, repeat=n):
            total = sum(r + s for r, s in seq)
            if total > step:
                continue
            denom = total
            for r, s in seq:
                denom *= factorial(r) * factorial(s)
            word = "".join("X" * r + "Y" * s for r, s in seq)
            if len(word) >= 2 and word[-1] == word[-2]:
                continue
            coeff[word] = coeff.get(word, 0) + sign / denom
    return tuple((w, c) for w, c in sorted(coeff.items(), key=lambda t: (len(t[0]), t[0])) if c)


def _nested(word: str, x, y, bracket):
    acc = x if word[-1] == "X" else y
    for letter in reversed(word[:-1]):
        acc = bracket(x if letter == "X" else y, acc)
    return acc


def bch(x: Sequence[Fraction], y: Sequence[Fraction], alg: StratifiedAlgebra) -> Vector:
    """Group product in exponential coordinates of the first kind."""
    if len(x) != alg.dim or len(y) != alg.dim:
        raise ValueError(f"points must have length {alg.dim}")
    x = tuple(Fraction(v) for v in x)
    y = tuple(Fraction(v) for v in y)
    out = [Fraction(0)] * alg.dim
    for word, c in dynkin_words(alg.step):
        v = _nested(word, x, y, lambda a, b: bracket_vec(a, b, alg))
        for k, vk in enumerate(v):
            if vk:
                out[k] += c * vk
    return tuple(out)


def inverse_point(x: Sequence[Fraction]) -> Vector:
    return tuple(-Fraction(v) for v in x)


def dilation(lam, x: Sequence[Fraction], alg: StratifiedAlgebra) -> Vector:
    """``delta_lambda``: scale the ``V_j`` coordinates by ``lambda**j``."""
    lam = Fraction(lam)
    if lam == 0:
        raise ValueError("dilation factor must be nonzero")
    return tuple(Fraction(v) * lam ** w for v, w in zip(x, alg.weights))


def _poly_bracket(alg: StratifiedAlgebra, a: Sequence[Poly], b: Sequence[Poly]) -> list[Poly]:
    nv = a[0].nvars
    out = [Poly(nv) for _ in range(alg.dim)]
    for (i, j), row in alg.structure_constants.items():
        if a[i] and b[j]:
            p = a[i] * b[j]
            for k, c in row.items():
                out[k] = out[k] + p * c
    return out


@lru_cache(maxsize=64)
def bch_polynomials(alg: StratifiedAlgebra) -> tuple[Poly, ...]:
    """Components of ``bch(a, b)`` as polynomials in ``a_1..a_n, b_1..b_n``."""
    n = alg.dim
    a = [Poly.variable(2 * n, i) for i in range(n)]
    b = [Poly.variable(2 * n, n + i) for i in range(n)]
    out = [Poly(2 * n) for _ in range(n)]
    for word, c in dynkin_words(alg.step):
        v = _nested(word, a, b, lambda p, q: _poly_bracket(alg, p, q))
        out = [o + vk * c for o, vk in zip(out, v)]
    return tuple(out)


@lru_cache(maxsize=64)
def _translation_jacobians(alg: StratifiedAlgebra) -> tuple[tuple[tuple[Poly, ...], ...], tuple[tuple[Poly, ...], ...]]:
    n = alg.dim
    polys = bch_polynomials(alg)
    zero_a = {i: 0 for i in range(n)}
    zero_b = {n + i: 0 for i in range(n)}
    keep_b = list(range(n, 2 * n))
    keep_a = list(range(n))
    # right[k][j] = d bch_k / d a_j at a = 0, as a polynomial in b
    right = tuple(tuple(p.diff(j).restrict(zero_a, keep_b) for j in range(n)) for p in polys)
    left = tuple(tuple(p.diff(n + j).restrict(zero_b, keep_a) for j in range(n)) for p in polys)
    return right, left


def _field_from_jacobian(jac, y: Sequence[Fraction], n: int) -> PolyVectorField:
    comps = []
    for k in range(n):
        acc = Poly(n)
        for j, yj in enumerate(y):
            if yj:
                acc = acc + jac[k][j] * Fraction(yj)
        comps.append(acc)
    return PolyVectorField(comps)


def right_invariant_field(y: Sequence[Fraction], alg: StratifiedAlgebra) -> PolyVectorField:
    """``Y^dagger``: the generator of ``p -> exp(tY) p`` (left translations)."""
    return _field_from_jacobian(_translation_jacobians(alg)[0], y, alg.dim)


def left_invariant_field(y: Sequence[Fraction], alg: StratifiedAlgebra) -> PolyVectorField:
    """``Y~``: the left-invariant field equal to ``Y`` at the identity."""
    return _field_from_jacobian(_translation_jacobians(alg)[1], y, alg.dim)


def dag_fields(alg: StratifiedAlgebra) -> list[PolyVectorField]:
    return [right_invariant_field(alg.basis_vector(i), alg) for i in range(alg.dim)]


def left_fields(alg: StratifiedAlgebra) -> list[PolyVectorField]:
    return [left_invariant_field(alg.basis_vector(i), alg) for i in range(alg.dim)]


# ---------------------------------------------------------------------------
# automorphisms


@dataclass(frozen=True)
class GroupAutomorphism:
    """A graded automorphism realised as the linear map ``x -> A x``."""

    alg: StratifiedAlgebra = field(repr=False)
    matrix: Matrix

    def __call__(self, x: Sequence[Fraction]) -> Vector:
        return mat_vec(self.matrix, x)

    def restriction(self, j: int = 1) -> Matrix:
        idx = self.alg.strata[j - 1]
        return tuple(tuple(self.matrix[r][c] for c in idx) for r in idx)

    def inverse(self) -> "GroupAutomorphism":
        return GroupAutomorphism(self.alg, inverse(self.matrix))


def _as_matrix(a) -> Matrix:
    return tuple(tuple(Fraction(x) for x in row) for row in a)


def automorphism_to_map(a, alg: StratifiedAlgebra, samples: int = 16, seed: int = 0) -> GroupAutomorphism:
    """Check that ``a`` is a graded Lie algebra automorphism; return its group map.

    ``a[r][c]`` is the ``e_r`` coefficient of the image of ``e_c``.
    Raises :class:`NotAutomorphismError` naming the first violating pair.
    """
    m = _as_matrix(a)
    n = alg.dim
    names = alg.basis_names
    if len(m) != n or any(len(r) != n for r in m):
        raise NotAutomorphismError(f"matrix must be {n}x{n}")
    try:
        inverse(m)
    except ValueError:
        raise NotAutomorphismError("matrix is singular") from None
    w = alg.weights
    for c in range(n):
        for r in range(n):
            if m[r][c] and w[r] != w[c]:
                raise NotAutomorphismError(
                    f"does not preserve strata: image of {names[c]} has a {names[r]} component"
                )
    cols = [tuple(m[r][c] for r in range(n)) for c in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            lhs = mat_vec(m, alg.bracket(alg.basis_vector(i), alg.basis_vector(j)))
            rhs = alg.bracket(cols[i], cols[j])
            if lhs != rhs:
                raise NotAutomorphismError(
                    f"not an automorphism: A[{names[i]},{names[j]}] != [A{names[i]},A{names[j]}]",
                    (names[i], names[j]),
                )
    phi = GroupAutomorphism(alg, m)
    rng = random.Random(seed)
    for _ in range(samples):
        x = tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(n))
        y = tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(n))
        if phi(bch(x, y, alg)) != bch(phi(x), phi(y), alg):
            raise ArithmeticError("bracket-preserving map failed the group homomorphism test")
    return phi


def is_isometric_automorphism(a, alg: StratifiedAlgebra, norm) -> Certificate:
    """Whether the automorphism ``a`` is an isometry for the norm on ``V_1``.

    Gram norms: ``A1^T G A1 == G`` exactly.  Polytope norms: ``A1`` permutes
    the facet functionals up to sign.
    """
    phi = automorphism_to_map(a, alg)
    a1 = phi.restriction(1)
    if norm.kind == "gram":
        g = norm.gram
        lhs = mat_mul(mat_mul(tuple(zip(*a1)), g), a1)
        if lhs == tuple(tuple(r) for r in g):
            return Certificate(True, ("A1^T G A1 = G",))
        bad = [
            f"(A1^T G A1)[{i}][{j}] = {lhs[i][j]} != {g[i][j]}"
            for i in range(len(g))
            for j in range(len(g))
            if lhs[i][j] != g[i][j]
        ]
        return Certificate(False, tuple(bad))
    facets = [tuple(f) for f in norm.facets]
    signed = set(facets) | {tuple(-x for x in f) for f in facets}
    details = []
    images = set()
    for f in facets:
        img = tuple(sum((f[k] * a1[k][j] for k in range(len(f))), Fraction(0)) for j in range(len(f)))
        if img not in signed:
            return Certificate(False, (f"facet {f} is sent to {img}, not a facet",))
        neg = tuple(-x for x in img)
        images.add(min(img, neg))
        details.append(f"{f} -> {img}")
    if len(images) != len(facets):
        return Certificate(False, ("facet map is not a bijection",))
    return Certificate(True, tuple(details))
