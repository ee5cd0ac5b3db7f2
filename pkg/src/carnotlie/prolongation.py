"""Tanaka prolongation of a stratified algebra with respect to a degree-zero part.

Degrees follow the usual convention: ``g_{-j} = V_j`` for the strata and
``g_0`` is the supplied subalgebra of Der_0(g).  For ``k >= 1`` an element of
``g_k`` is a linear map sending each ``g_{-j}`` into ``g_{k-j}`` and obeying
Leibniz on ``g_-``.  Every nonnegative-degree element is stored by its
images of the basis vectors of ``g``: ``images[i]`` is a coordinate vector
in ``g_{d - w_i}`` (stratum coordinates when that degree is negative,
coordinates in the computed basis otherwise).
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import StratifiedAlgebra
from .derivations import GradedMap
from .linalg import Subspace, Vector, nullspace, rank, solve

Images = tuple[Vector, ...]


class MembershipError(ArithmeticError):
    """A computed element is not in the span of the expected graded piece."""


@dataclass(frozen=True)
class ProlElement:
    degree: int
    coords: Vector
    out_of_range: bool = False

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __neg__(self) -> "ProlElement":
        return ProlElement(self.degree, tuple(-c for c in self.coords), self.out_of_range)

    def __add__(self, other: "ProlElement") -> "ProlElement":
        if self.degree != other.degree:
            raise ValueError("cannot add elements of different degree")
        return ProlElement(self.degree, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def scale(self, c: Fraction) -> "ProlElement":
        return ProlElement(self.degree, tuple(c * a for a in self.coords), self.out_of_range)


@dataclass
class ProlongationTower:
    alg: StratifiedAlgebra
    g0: list[GradedMap]
    # degree -> basis elements (as images of the basis of g), degrees 0..top
    positive: dict[int, list[Images]]
    terminated_at: int | None
    max_degree: int
    transitive: dict[int, bool] = field(default_factory=dict)
    _rb_cache: dict = field(default_factory=dict, repr=False)

    @property
    def status(self) -> str:
        if self.terminated_at is not None:
            return f"terminated at degree {self.terminated_at}"
        return f"undetermined beyond degree {self.max_degree}"

    @property
    def top_degree(self) -> int:
        return max(self.positive)

    def space_dim(self, d: int) -> int:
        s = self.alg.step
        if d < 0:
            return len(self.alg.strata[-d - 1]) if -d <= s else 0
        if d in self.positive:
            return len(self.positive[d])
        if self.terminated_at is not None and d >= self.terminated_at:
            return 0
        raise ValueError(f"degree {d} lies beyond the computed tower ({self.status})")

    def dims(self) -> dict[int, int]:
        s = self.alg.step
        out = {d: self.space_dim(d) for d in range(-s, 0)}
        out.update({d: len(b) for d, b in sorted(self.positive.items())})
        return out

    def degree_dims(self) -> tuple[int, ...]:
        """``(dim g, dim g_0, dim g_1, ...)`` up to the last computed degree."""
        return (self.alg.dim,) + tuple(len(self.positive[d]) for d in sorted(self.positive))

    @property
    def dimension(self) -> int:
        if self.terminated_at is None:
            raise ValueError("prolongation not certified finite: " + self.status)
        return self.alg.dim + sum(len(b) for b in self.positive.values())

    def basis(self, d: int) -> list[ProlElement]:
        n = self.space_dim(d)
        return [
            ProlElement(d, tuple(Fraction(int(a == b)) for b in range(n))) for a in range(n)
        ]

    def all_basis(self) -> list[ProlElement]:
        out = []
        for d in range(-self.alg.step, self.top_degree + 1):
            out.extend(self.basis(d))
        return out

    def from_algebra(self, x: Sequence[Fraction]) -> list[ProlElement]:
        """Split a vector of g into its graded pieces."""
        return [
            ProlElement(-j, tuple(Fraction(x[i]) for i in st))
            for j, st in enumerate(self.alg.strata, start=1)
        ]

    def images(self, u: ProlElement) -> Images:
        """Images of the basis of g under a nonnegative-degree element."""
        if u.degree < 0:
            raise ValueError("only nonnegative degrees act on g")
        basis = self.positive[u.degree] if u.degree in self.positive else []
        out = []
        n = self.alg.dim
        w = self.alg.weights
        for i in range(n):
            length = self.space_dim(u.degree - w[i])
            acc = [Fraction(0)] * length
            for c, b in zip(u.coords, basis):
                if c:
                    for t, x in enumerate(b[i]):
                        if x:
                            acc[t] += c * x
            out.append(tuple(acc))
        return tuple(out)

    def act(self, u: ProlElement, i: int) -> ProlElement:
        """``[u, e_i] = u(e_i)`` for ``u`` of degree >= 0."""
        return ProlElement(u.degree - self.alg.weights[i], self.images(u)[i])

    def coordinates_of(self, d: int, images: Images) -> Vector:
        """Express a map given by images in the basis of ``g_d`` exactly."""
        flat = [x for im in images for x in im]
        dim = self.space_dim(d)
        if dim == 0:
            if any(flat):
                raise MembershipError(f"nonzero map in g_{d}, which is zero")
            return ()
        cols = [[x for im in b for x in im] for b in self.positive[d]]
        rows = list(zip(*cols))
        sol = solve(rows, flat, dim)
        if sol is None:
            raise MembershipError(f"map is not in the span of g_{d}")
        return sol

    def _rb(self, d: int, j: int) -> list[list[Fraction]]:
        """Matrix of ``v -> [v, e_j]`` from g_d to g_{d - w_j}."""
        key = (d, j)
        if key in self._rb_cache:
            return self._rb_cache[key]
        alg = self.alg
        wj = alg.weights[j]
        rows = self.space_dim(d - wj)
        cols = self.space_dim(d)
        m = [[Fraction(0)] * cols for _ in range(rows)]
        if rows and cols:
            if d < 0:
                src = alg.strata[-d - 1]
                tgt = alg.strata[-d + wj - 1]
                tpos = {idx: p for p, idx in enumerate(tgt)}
                for c, i in enumerate(src):
                    for k, v in alg.c(i, j).items():
                        m[tpos[k]][c] += v
            else:
                for c, b in enumerate(self.positive[d]):
                    for r, x in enumerate(b[j]):
                        m[r][c] = x
        self._rb_cache[key] = m
        return m


def _images_from_maps(alg: StratifiedAlgebra, maps: Sequence[GradedMap]) -> list[Images]:
    out = []
    w = alg.weights
    for u in maps:
        imgs = []
        for i in range(alg.dim):
            rows = alg.strata[w[i] - 1]
            imgs.append(tuple(u.matrix[r][i] for r in rows))
        out.append(tuple(imgs))
    return out


def _is_transitive(tower: ProlongationTower, d: int) -> bool:
    basis = tower.positive[d]
    if not basis:
        return True
    v1 = tower.alg.strata[0]
    vecs = [[x for i in v1 for x in b[i]] for b in basis]
    return rank(vecs, len(vecs[0])) == len(basis)


def _matmul_lin(m: list[list[Fraction]], expr: list[dict[int, Fraction]]) -> list[dict[int, Fraction]]:
    out = []
    for row in m:
        acc: dict[int, Fraction] = {}
        for c, a in enumerate(row):
            if a:
                for var, v in expr[c].items():
                    acc[var] = acc.get(var, 0) + a * v
        out.append({k: v for k, v in acc.items() if v})
    return out


def _lin_add(a: list[dict[int, Fraction]], b: list[dict[int, Fraction]], sign: int = 1) -> list[dict[int, Fraction]]:
    out = []
    for x, y in zip(a, b):
        acc = dict(x)
        for k, v in y.items():
            acc[k] = acc.get(k, 0) + sign * v
        out.append({k: v for k, v in acc.items() if v})
    return out


def _generator_expressions(alg: StratifiedAlgebra) -> dict[int, list[tuple[int, int, Fraction]]]:
    """For each e_l outside V_1: e_l = sum coef * [e_a, e_b], a in V_1, b in V_{w-1}."""
    out = {}
    v1 = alg.strata[0]
    for wt in range(2, alg.step + 1):
        tgt = alg.strata[wt - 1]
        pairs = [(a, b) for a in v1 for b in alg.strata[wt - 2]]
        cols = [[alg.c(a, b).get(k, Fraction(0)) for k in tgt] for a, b in pairs]
        rows = [list(r) for r in zip(*cols)]
        for p, l in enumerate(tgt):
            rhs = [Fraction(int(q == p)) for q in range(len(tgt))]
            sol = solve(rows, rhs, len(pairs))
            if sol is None:
                raise ValueError(f"{alg.basis_names[l]} is not in [V1, V{wt - 1}]")
            out[l] = [(a, b, c) for (a, b), c in zip(pairs, sol) if c]
    return out


def _compute_degree(tower: ProlongationTower, k: int, gen_expr) -> list[Images]:
    alg = tower.alg
    n = alg.dim
    w = alg.weights
    v1 = alg.strata[0]
    m = tower.space_dim(k - 1)
    nvars = len(v1) * m
    if nvars == 0:
        return []
    expr: dict[int, list[dict[int, Fraction]]] = {}
    for p, a in enumerate(v1):
        expr[a] = [{p * m + t: Fraction(1)} for t in range(m)]
    for wt in range(2, alg.step + 1):
        for l in alg.strata[wt - 1]:
            acc = [dict() for _ in range(tower.space_dim(k - wt))]
            for a, b, c in gen_expr[l]:
                # u[e_a, e_b] = [u e_a, e_b] - [u e_b, e_a]
                t1 = _matmul_lin(tower._rb(k - 1, b), expr[a])
                t2 = _matmul_lin(tower._rb(k - w[b], a), expr[b])
                term = _lin_add(t1, t2, -1)
                acc = _lin_add(acc, [{v: c * x for v, x in d.items()} for d in term])
            expr[l] = acc

    rows = []
    for i in range(n):
        for j in range(i + 1, n):
            length = tower.space_dim(k - w[i] - w[j])
            if not length:
                continue
            lhs = [dict() for _ in range(length)]
            for l, c in alg.c(i, j).items():
                lhs = _lin_add(lhs, [{v: c * x for v, x in d.items()} for d in expr[l]])
            r1 = _matmul_lin(tower._rb(k - w[i], j), expr[i])
            r2 = _matmul_lin(tower._rb(k - w[j], i), expr[j])
            eq = _lin_add(_lin_add(lhs, r1, -1), r2, 1)
            rows.extend(r for r in eq if r)
    sols = nullspace(rows, nvars)
    out = []
    for p in sols:
        imgs = []
        for i in range(n):
            imgs.append(
                tuple(sum((x * p[v] for v, x in d.items()), Fraction(0)) for d in expr[i])
            )
        out.append(tuple(imgs))
    return out


def prolong(alg: StratifiedAlgebra, g0_basis: Sequence[GradedMap], max_degree: int | None = None) -> ProlongationTower:
    """Compute ``g_1, g_2, ...`` until the first zero piece or ``max_degree``.

    ``g0_basis`` may be any subalgebra of Der_0(g).  ``max_degree`` defaults
    to ``step + 2``.
    """
    if max_degree is None:
        max_degree = alg.step + 2
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    tower = ProlongationTower(alg, list(g0_basis), {0: _images_from_maps(alg, g0_basis)}, None, max_degree)
    tower.transitive[0] = _is_transitive(tower, 0)
    gen_expr = _generator_expressions(alg)
    for k in range(1, max_degree + 1):
        tower.positive[k] = _compute_degree(tower, k, gen_expr)
        tower.transitive[k] = _is_transitive(tower, k)
        if not tower.positive[k] and all(tower.transitive[d] for d in range(k)):
            tower.terminated_at = k
            break
    return tower


def prol_bracket(u: ProlElement, v: ProlElement, tower: ProlongationTower) -> ProlElement:
    """Graded bracket of the prolongation, expressed in the tower's bases."""
    alg = tower.alg
    d = u.degree + v.degree
    if d < -alg.step or u.out_of_range or v.out_of_range:
        return ProlElement(d, (), out_of_range=True)
    if u.degree < 0 and v.degree < 0:
        x = _embed(alg, u)
        y = _embed(alg, v)
        z = alg.bracket(x, y)
        return ProlElement(d, tuple(z[i] for i in alg.strata[-d - 1]))
    if u.degree < 0:
        return -prol_bracket(v, u, tower)
    if v.degree < 0:
        # [u, X] = u(X)
        imgs = tower.images(u)
        acc = [Fraction(0)] * tower.space_dim(d)
        for c, i in zip(v.coords, alg.strata[-v.degree - 1]):
            if c:
                for t, x in enumerate(imgs[i]):
                    acc[t] += c * x
        return ProlElement(d, tuple(acc))
    # [u, v](X) = [u(X), v] + [u, v(X)]
    imgs = []
    for i in range(alg.dim):
        a = prol_bracket(tower.act(u, i), v, tower)
        b = prol_bracket(u, tower.act(v, i), tower)
        imgs.append(tuple(x + y for x, y in zip(a.coords, b.coords)) if a.coords or b.coords else ())
    if d > tower.top_degree and (tower.terminated_at is None or d < tower.terminated_at):
        raise ValueError(f"degree {d} lies beyond the computed tower ({tower.status})")
    return ProlElement(d, tower.coordinates_of(d, tuple(imgs)))


def _embed(alg: StratifiedAlgebra, x: ProlElement) -> Vector:
    v = [Fraction(0)] * alg.dim
    for c, i in zip(x.coords, alg.strata[-x.degree - 1]):
        v[i] = c
    return tuple(v)


def to_algebra(alg: StratifiedAlgebra, x: ProlElement) -> Vector:
    """Vector of g for a negative-degree element."""
    return _embed(alg, x)


def _leibniz_element_defects(tower: ProlongationTower, u: ProlElement) -> list[str]:
    alg = tower.alg
    names = alg.basis_names
    out = []
    basis = [tower.from_algebra(alg.basis_vector(i))[alg.weights[i] - 1] for i in range(alg.dim)]
    for i, j in itertools.combinations(range(alg.dim), 2):
        c = alg.bracket(alg.basis_vector(i), alg.basis_vector(j))
        lhs = None
        for piece in tower.from_algebra(c):
            if piece.is_zero():
                continue
            r = prol_bracket(u, piece, tower)
            lhs = r if lhs is None else lhs + r
        r1 = prol_bracket(prol_bracket(u, basis[i], tower), basis[j], tower)
        r2 = prol_bracket(basis[i], prol_bracket(u, basis[j], tower), tower)
        rhs = r1 + r2
        lhs_c = lhs.coords if lhs is not None else tuple(Fraction(0) for _ in rhs.coords)
        if any(a != b for a, b in zip(lhs_c, rhs.coords)):
            out.append(f"Leibniz fails for g_{u.degree} element {u.coords} on pair ({names[i]},{names[j]})")
    return out


def check_graded(tower: ProlongationTower, jacobi_samples: int = 200, seed: int = 0) -> list[str]:
    """Defects of the graded Lie algebra structure (empty when sound)."""
    defects: list[str] = []
    for d in sorted(tower.positive):
        for u in tower.basis(d):
            defects.extend(_leibniz_element_defects(tower, u))
    elements = tower.all_basis()
    table = {}
    for a, b in itertools.product(range(len(elements)), repeat=2):
        u, v = elements[a], elements[b]
        try:
            table[(a, b)] = prol_bracket(u, v, tower)
        except MembershipError as exc:
            defects.append(f"grading: [g_{u.degree} #{a}, g_{v.degree} #{b}]: {exc}")
        except ValueError:
            # beyond the computed degrees: nothing to check
            continue
    for (a, b), r in table.items():
        if a < b and (b, a) in table:
            s = table[(b, a)]
            if r.coords != (-s).coords:
                defects.append(f"antisymmetry fails on basis pair ({a},{b})")
    triples = list(itertools.combinations(range(len(elements)), 3))
    if len(triples) > jacobi_samples:
        triples = random.Random(seed).sample(triples, jacobi_samples)
    for a, b, c in triples:
        try:
            x, y, z = elements[a], elements[b], elements[c]
            t1 = prol_bracket(x, prol_bracket(y, z, tower), tower)
            t2 = prol_bracket(y, prol_bracket(z, x, tower), tower)
            t3 = prol_bracket(z, prol_bracket(x, y, tower), tower)
        except (MembershipError, ValueError):
            continue
        if t1.out_of_range:
            continue
        total = [p + q + r for p, q, r in zip(t1.coords, t2.coords, t3.coords)]
        if any(total):
            defects.append(f"Jacobi fails on basis triple ({a},{b},{c})")
    return defects


def bracket_table(tower: ProlongationTower) -> dict[tuple[int, int], dict[int, Fraction]]:
    """Structure constants of Prol(g) in the basis ``all_basis()`` (finite towers only)."""
    elements = tower.all_basis()
    offsets = {}
    pos = 0
    for d in range(-tower.alg.step, tower.top_degree + 1):
        offsets[d] = pos
        pos += tower.space_dim(d)
    out = {}
    for a, b in itertools.product(range(len(elements)), repeat=2):
        r = prol_bracket(elements[a], elements[b], tower)
        if r.out_of_range:
            continue
        row = {offsets[r.degree] + t: c for t, c in enumerate(r.coords) if c}
        if row:
            out[(a, b)] = row
    return out


def first_prolongation_of(gl_part: Sequence[Sequence[Sequence[Fraction]]], n: int) -> list[tuple]:
    """Classical first prolongation ``{T : V x V -> V symmetric, T(v, .) in A}``.

    ``gl_part`` is a basis of a subspace ``A`` of gl(n) (matrices).  Returned
    as a basis of the symmetric tensors ``T[k][i][j]`` flattened.
    Used as an independent check of ``g_1`` for abelian algebras.
    """
    amb = Subspace.span([[x for row in m for x in row] for m in gl_part], n * n)
    ann = amb.annihilator()
    # unknowns T[k][i][j], index k*n*n + i*n + j
    nv = n * n * n
    rows = []
    for k in range(n):
        for i in range(n):
            for j in range(i + 1, n):
                rows.append({k * n * n + i * n + j: Fraction(1), k * n * n + j * n + i: Fraction(-1)})
    for i in range(n):
        # matrix (k, j) -> T[k][i][j] must lie in A
        for a in ann:
            row = {}
            for k in range(n):
                for j in range(n):
                    c = a[k * n + j]
                    if c:
                        row[k * n * n + i * n + j] = c
            if row:
                rows.append(row)
    return nullspace(rows, nv)
