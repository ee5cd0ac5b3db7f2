"""John ellipsoids of symmetric polytope norms on the first stratum.

This is the only floating-point part of the package.  The hand-off to the
exact pipeline is :func:`gram_from_norm`, which rationalises the Gram matrix
and certifies positive definiteness exactly.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import ParseError, parse_rational
from .linalg import Vector, inverse, is_positive_definite, rank

DEFAULT_EPS = 1e-9
MAX_ITER = 100_000
MAX_DIM = 6
DEFAULT_DENOMINATOR = 10**6


class DegeneratePointSetError(ValueError):
    def __init__(self, message: str, deficient: np.ndarray):
        super().__init__(message)
        self.deficient = deficient


class NormError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class NormSpec:
    """A norm on V_1: a Gram matrix or a centrally symmetric polytope.

    Polytope balls are ``{x : |<a_i, x>| <= 1 for all i}``; list one facet
    of each antipodal pair.
    """

    kind: str
    gram: tuple[Vector, ...] = ()
    facets: tuple[Vector, ...] = ()

    def __post_init__(self):
        if self.kind == "gram":
            g = self.gram
            n = len(g)
            if any(len(r) != n for r in g):
                raise NormError("Gram matrix must be square")
            if not is_positive_definite(g):
                raise NormError("Gram matrix must be symmetric positive definite")
        elif self.kind == "polytope":
            f = self.facets
            if not f:
                raise NormError("polytope norm needs facets")
            d = len(f[0])
            if any(len(a) != d for a in f):
                raise NormError("facet functionals have different lengths")
            if any(not any(a) for a in f):
                raise NormError("zero facet functional")
            if rank(f, d) != d:
                raise NormError("facets do not span the dual space: unbounded ball")
            seen = set()
            for a in f:
                key = min(a, tuple(-x for x in a))
                if key in seen:
                    raise NormError(f"duplicate facet (up to sign): {a}")
                seen.add(key)
        else:
            raise NormError(f"unknown norm kind {self.kind!r}")

    @classmethod
    def from_gram(cls, gram) -> "NormSpec":
        return cls("gram", gram=tuple(tuple(Fraction(x) for x in r) for r in gram))

    @classmethod
    def from_facets(cls, facets) -> "NormSpec":
        return cls("polytope", facets=tuple(tuple(Fraction(x) for x in r) for r in facets))

    @classmethod
    def identity(cls, d: int) -> "NormSpec":
        return cls.from_gram([[int(i == j) for j in range(d)] for i in range(d)])

    @property
    def dim(self) -> int:
        return len(self.gram) if self.kind == "gram" else len(self.facets[0])

    def to_json(self) -> dict:
        rows = self.gram if self.kind == "gram" else self.facets
        return {"kind": self.kind, "rows": [[str(x) for x in r] for r in rows]}


@dataclass(frozen=True)
class Ellipsoid:
    """``{x : x^T Q^{-1} x <= 1}``; ``tolerance`` is the achieved epsilon."""

    Q: np.ndarray
    tolerance: float
    iterations: int = 0

    def __post_init__(self):
        q = self.Q
        scale = max(1.0, float(np.max(np.abs(q))))
        if np.max(np.abs(q - q.T)) > 1e-12 * scale:
            raise ValueError("ellipsoid matrix is not symmetric")
        if np.min(np.linalg.eigvalsh(q)) <= 0:
            raise ValueError("ellipsoid matrix is not positive definite")

    def semi_axes(self) -> np.ndarray:
        return np.sqrt(np.linalg.eigvalsh(self.Q))


def mvee(points, eps: float = DEFAULT_EPS, max_iter: int = MAX_ITER) -> Ellipsoid:
    """Minimum-volume ellipsoid centred at the origin enclosing ``points``.

    Khachiyan's barycentric coordinate ascent with Todd-Yildirim away steps.
    Intended for centrally symmetric point sets (pass both ``p`` and ``-p``).
    On return every point satisfies ``p^T Q^{-1} p <= 1 + eps``.
    """
    p = np.asarray(points, dtype=float)
    if p.ndim != 2:
        raise ValueError("points must be a 2-d array")
    m, d = p.shape
    if d > MAX_DIM:
        raise ValueError(f"dimension {d} exceeds cap {MAX_DIM}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    r = np.linalg.matrix_rank(p) if m else 0
    if r < d:
        _, _, vt = np.linalg.svd(p, full_matrices=True)
        raise DegeneratePointSetError(
            f"points span only a {r}-dimensional subspace of R^{d}", vt[r:]
        )
    u = np.full(m, 1.0 / m)
    it = 0
    for it in range(1, max_iter + 1):
        x = (p.T * u) @ p
        xi = np.linalg.inv(x)
        g = np.einsum("ij,jk,ik->i", p, xi, p)
        j = int(np.argmax(g))
        gmax = g[j]
        support = np.flatnonzero(u > 0)
        k = support[int(np.argmin(g[support]))]
        gmin = g[k]
        if gmax <= d * (1 + eps) and gmin >= d * (1 - eps):
            break
        if gmax - d >= d - gmin:
            step = (gmax - d) / (d * (gmax - 1))
            u *= 1 - step
            u[j] += step
        else:
            cap = u[k] / (1 - u[k])
            # for gmin <= 1 the objective increases all the way to the drop step
            step = cap if gmin <= 1 else min((d - gmin) / (d * (gmin - 1)), cap)
            u *= 1 + step
            u[k] -= step
            if u[k] < 1e-300:
                u[k] = 0.0
    else:
        raise ConvergenceError(f"no {eps}-optimal ellipsoid after {max_iter} iterations")
    q = d * ((p.T * u) @ p)
    q = (q + q.T) / 2
    achieved = float(np.max(np.einsum("ij,jk,ik->i", p, np.linalg.inv(q), p))) - 1
    return Ellipsoid(q, max(achieved, 0.0), it)


def _facet_array(norm: NormSpec) -> np.ndarray:
    if norm.kind != "polytope":
        raise NormError("inner John ellipsoid needs a polytope norm")
    return np.array([[float(x) for x in a] for a in norm.facets])


def inner_john(norm: NormSpec, eps: float = DEFAULT_EPS) -> Ellipsoid:
    """Maximal inscribed ellipsoid of the polytope ball, as the polar of the
    minimal enclosing ellipsoid of ``conv{+-a_i}``."""
    a = _facet_array(norm)
    outer = mvee(np.vstack([a, -a]), eps)
    q = np.linalg.inv(outer.Q)
    q = (q + q.T) / 2
    slack = float(np.max(np.einsum("ij,jk,ik->i", a, q, a))) - 1
    return Ellipsoid(q, max(slack, 0.0), outer.iterations)


def gram_from_norm(
    norm: NormSpec, eps: float = DEFAULT_EPS, max_denominator: int = DEFAULT_DENOMINATOR
) -> tuple[Vector, ...]:
    """Exact Gram matrix of the scalar product attached to ``norm``."""
    if norm.kind == "gram":
        return norm.gram
    e = inner_john(norm, eps)
    g = np.linalg.inv(e.Q)
    d = g.shape[0]
    out = [[Fraction(0)] * d for _ in range(d)]
    for i in range(d):
        for j in range(i, d):
            v = Fraction((g[i, j] + g[j, i]) / 2).limit_denominator(max_denominator)
            out[i][j] = out[j][i] = v
    gram = tuple(tuple(r) for r in out)
    if not is_positive_definite(gram):
        raise NormError(
            f"rationalised Gram matrix is not positive definite at denominator bound {max_denominator}"
        )
    return gram


def facet_symmetries(norm: NormSpec) -> list[tuple[Vector, ...]]:
    """All linear maps T (exact) with T(ball) = ball, i.e. facets permuted up to sign."""
    facets = [tuple(a) for a in norm.facets]
    d = len(facets[0])
    signed = facets + [tuple(-x for x in a) for a in facets]
    signed_set = set(signed)
    # a basis of the dual made of facets
    base: list[int] = []
    for i in range(len(facets)):
        if rank([facets[j] for j in base + [i]], d) == len(base) + 1:
            base.append(i)
        if len(base) == d:
            break
    b = tuple(facets[i] for i in base)
    b_inv = inverse(b)
    found = []
    for images in itertools.permutations(signed, d):
        if rank(images, d) < d:
            continue
        # f o T^{-1} sends facet base[i] to images[i]: S = T^{-1} with b S = images
        s = _mat(b_inv, images)
        if all(tuple(_row_times(a, s)) in signed_set for a in facets):
            t = inverse(s)
            if t not in found:
                found.append(t)
    return found


def _mat(a, b):
    return tuple(
        tuple(sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0)) for j in range(len(b[0])))
        for i in range(len(a))
    )


def _row_times(row, m):
    return tuple(sum((row[k] * m[k][j] for k in range(len(row))), Fraction(0)) for j in range(len(m[0])))


def equivariance_residual(norm: NormSpec, q: np.ndarray, t) -> float:
    tf = np.array([[float(x) for x in r] for r in t])
    return float(np.max(np.abs(tf @ q @ tf.T - q)))


_ROW_SPLIT = re.compile(r"[\s,]+")


def parse_norm(text: str) -> NormSpec:
    """Parse ``norm: gram`` / ``norm: polytope`` followed by rows of ``p/q``."""
    kind = None
    rows: list[list[Fraction]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if kind is None:
            m = re.fullmatch(r"norm\s*:\s*(\w+)", line)
            if not m:
                raise ParseError("expected 'norm: gram' or 'norm: polytope'", lineno, 1)
            kind = m.group(1)
            if kind not in ("gram", "polytope"):
                raise ParseError(f"unknown norm kind {kind!r}", lineno, line.index(kind) + 1)
            continue
        body = line.strip("[]")
        row = []
        col = raw.find(body) + 1
        for tok in _ROW_SPLIT.split(body.strip()):
            if not tok:
                continue
            try:
                row.append(parse_rational(tok.strip("[]")))
            except ValueError:
                raise ParseError(f"bad rational {tok!r}", lineno, col + max(body.find(tok), 0)) from None
        rows.append(row)
    if kind is None:
        raise ParseError("empty norm file", 1, 1)
    try:
        if kind == "gram":
            return NormSpec.from_gram(rows)
        return NormSpec.from_facets(rows)
    except NormError as exc:
        raise ParseError(str(exc), 1, 1) from None


def format_norm(norm: NormSpec) -> str:
    rows = norm.gram if norm.kind == "gram" else norm.facets
    return f"norm: {norm.kind}\n" + "\n".join(" ".join(str(x) for x in r) for r in rows) + "\n"
