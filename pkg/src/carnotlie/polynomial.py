"""Sparse multivariate polynomials and polynomial vector fields over Q."""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Monomial = tuple[int, ...]


def _grlex_key(m: Monomial):
    return (sum(m), m)


class Poly:
    """Polynomial in ``nvars`` variables, stored as ``{exponent tuple: Fraction}``.

    Zero coefficients are never stored, so ``==`` is polynomial equality.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Monomial, Fraction] | None = None):
        self.nvars = nvars
        self.terms: dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                if c:
                    self.terms[tuple(m)] = Fraction(c)

    @classmethod
    def constant(cls, nvars: int, c) -> "Poly":
        return cls(nvars, {(0,) * nvars: Fraction(c)})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "Poly":
        m = [0] * nvars
        m[i] = 1
        return cls(nvars, {tuple(m): Fraction(1)})

    @classmethod
    def linear(cls, coeffs: Sequence[Fraction]) -> "Poly":
        n = len(coeffs)
        return cls(n, {tuple(int(j == i) for j in range(n)): c for i, c in enumerate(coeffs) if c})

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        p = Poly(self.nvars)
        p.terms = out
        return p

    def __neg__(self) -> "Poly":
        p = Poly(self.nvars)
        p.terms = {m: -c for m, c in self.terms.items()}
        return p

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = Fraction(other)
            if not c:
                return Poly(self.nvars)
            p = Poly(self.nvars)
            p.terms = {m: c * v for m, v in self.terms.items()}
            return p
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def diff(self, i: int) -> "Poly":
        out = {}
        for m, c in self.terms.items():
            e = m[i]
            if e:
                mm = list(m)
                mm[i] = e - 1
                out[tuple(mm)] = c * e
        return Poly(self.nvars, out)

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def weighted_degrees(self, weights: Sequence[int]) -> set[int]:
        return {sum(e * w for e, w in zip(m, weights)) for m in self.terms}

    def __call__(self, point: Sequence[Fraction]) -> Fraction:
        total = Fraction(0)
        for m, c in self.terms.items():
            t = c
            for x, e in zip(point, m):
                if e:
                    t *= Fraction(x) ** e
            total += t
        return total

    def substitute(self, polys: Sequence["Poly"]) -> "Poly":
        """Compose: replace variable ``i`` by ``polys[i]`` (all in a common ring)."""
        nv = polys[0].nvars if polys else 0
        out = Poly(nv)
        powers: dict[tuple[int, int], Poly] = {}

        def power(i, e):
            key = (i, e)
            if key not in powers:
                powers[key] = polys[i] if e == 1 else power(i, e - 1) * polys[i]
            return powers[key]

        for m, c in self.terms.items():
            t = Poly.constant(nv, c)
            for i, e in enumerate(m):
                if e:
                    t = t * power(i, e)
            out = out + t
        return out

    def restrict(self, fixed: Mapping[int, Fraction], keep: Sequence[int]) -> "Poly":
        """Set variables in ``fixed`` to constants; reindex the ``keep`` variables."""
        out: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            t = c
            for i, v in fixed.items():
                if m[i]:
                    t *= Fraction(v) ** m[i]
            if not t:
                continue
            mm = tuple(m[i] for i in keep)
            out[mm] = out.get(mm, 0) + t
        return Poly(len(keep), out)

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        """Terms in graded lexicographic order (highest first)."""
        return sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def to_str(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        names = names or [f"x{i + 1}" for i in range(self.nvars)]
        parts = []
        for m, c in self.sorted_terms():
            mono = "*".join(
                names[i] if e == 1 else f"{names[i]}^{e}" for i, e in enumerate(m) if e
            )
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            parts.append(("-" if c < 0 else "+", body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def __repr__(self) -> str:
        return f"Poly({self.to_str()})"


class PolyVectorField:
    """Vector field on Q^n whose components are polynomials."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[Poly]):
        self.components = tuple(components)

    @property
    def ambient_dim(self) -> int:
        return len(self.components)

    @classmethod
    def constant(cls, v: Sequence[Fraction]) -> "PolyVectorField":
        n = len(v)
        return cls([Poly.constant(n, c) for c in v])

    @classmethod
    def linear(cls, matrix: Sequence[Sequence[Fraction]]) -> "PolyVectorField":
        """Field ``x -> A x``."""
        return cls([Poly.linear(row) for row in matrix])

    @classmethod
    def zero(cls, n: int) -> "PolyVectorField":
        return cls([Poly(n) for _ in range(n)])

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyVectorField) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __add__(self, other: "PolyVectorField") -> "PolyVectorField":
        return PolyVectorField([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "PolyVectorField") -> "PolyVectorField":
        return PolyVectorField([a - b for a, b in zip(self.components, other.components)])

    def __neg__(self) -> "PolyVectorField":
        return PolyVectorField([-a for a in self.components])

    def __mul__(self, c) -> "PolyVectorField":
        return PolyVectorField([a * c for a in self.components])

    __rmul__ = __mul__

    def __bool__(self) -> bool:
        return any(self.components)

    def __call__(self, point: Sequence[Fraction]) -> tuple[Fraction, ...]:
        return tuple(p(point) for p in self.components)

    def apply_to(self, f: Poly) -> Poly:
        """Directional derivative ``sum_i Z^i d_i f``."""
        out = Poly(f.nvars)
        for i, zi in enumerate(self.components):
            if zi:
                d = f.diff(i)
                if d:
                    out = out + zi * d
        return out

    def to_str(self, names: Sequence[str] | None = None) -> str:
        n = self.ambient_dim
        names = names or [f"x{i + 1}" for i in range(n)]
        parts = []
        for i, p in enumerate(self.components):
            if p:
                parts.append(f"({p.to_str(names)})*d_{names[i]}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self) -> str:
        return f"PolyVectorField({self.to_str()})"


def field_bracket(a: PolyVectorField, b: PolyVectorField) -> PolyVectorField:
    """Lie bracket ``[A, B]^k = A(B^k) - B(A^k)``."""
    if a.ambient_dim != b.ambient_dim:
        raise ValueError("vector fields live in different dimensions")
    return PolyVectorField([a.apply_to(bk) - b.apply_to(ak) for ak, bk in zip(a.components, b.components)])


def linear_substitution(n: int, matrix: Sequence[Sequence[Fraction]]) -> list[Poly]:
    """The polynomials ``(M x)_i`` used to compose with a linear map."""
    return [Poly.linear(row) for row in matrix]


def coefficient_vectors(fields: Iterable[PolyVectorField]) -> tuple[list[tuple], list[dict]]:
    """Flatten fields into a common coordinate space of (component, monomial) keys."""
    fields = list(fields)
    keys = sorted(
        {(i, m) for f in fields for i, p in enumerate(f.components) for m in p.terms},
        key=lambda k: (k[0], _grlex_key(k[1])),
    )
    pos = {k: j for j, k in enumerate(keys)}
    vecs = []
    for f in fields:
        vecs.append({pos[(i, m)]: c for i, p in enumerate(f.components) for m, c in p.terms.items()})
    return keys, vecs
