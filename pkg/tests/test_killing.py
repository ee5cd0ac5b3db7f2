import itertools
from fractions import Fraction

import pytest

from carnotlie.algebra import abelian, heisenberg
from carnotlie.derivations import isometric_part
from carnotlie.group_law import dag_fields
from carnotlie.killing import (
    FieldSpan,
    NotClosedError,
    contact_check,
    identification_defects,
    killing_basis,
    killing_filtration,
    left_frame_coefficients,
    push_forward,
)
from carnotlie.linalg import Subspace
from carnotlie.polynomial import Poly, PolyVectorField, field_bracket
from carnotlie.prolongation import prolong

from conftest import identity_gram

F = Fraction
ROT = [[F(3, 5), F(-4, 5), 0], [F(4, 5), F(3, 5), 0], [0, 0, 1]]


def _killing(alg):
    g0 = isometric_part(alg, identity_gram(alg))
    return killing_basis(alg, g0), g0


def test_heisenberg_killing_algebra():
    h = heisenberg()
    K, _ = _killing(h)
    assert K.dim == 4
    assert [s.dim for s in killing_filtration(K)] == [3, 1, 0]
    x, y = Poly.variable(3, 0), Poly.variable(3, 1)
    rot = K.basis[3]
    # rotation field vanishes at the origin and rotates the horizontal plane
    assert rot((0, 0, 0)) == (0, 0, 0)
    assert rot.components[2] == Poly(3)
    assert rot.components[0] == y * rot.components[0].terms[(0, 1, 0)]


@pytest.mark.parametrize("n", [2, 3, 4])
def test_abelian_euclidean_motions(n):
    K, _ = _killing(abelian(n))
    assert K.dim == n + n * (n - 1) // 2
    chain = killing_filtration(K)
    assert [s.dim for s in chain] == [K.dim, n * (n - 1) // 2, 0]


def test_corpus_killing(corpus_alg):
    K, g0 = _killing(corpus_alg)
    assert K.dim == corpus_alg.dim + len(g0)
    for f in K.basis:
        assert contact_check(f, corpus_alg)
        for p in f.components:
            assert max(p.weighted_degrees(corpus_alg.weights), default=0) <= corpus_alg.step
    chain = killing_filtration(K)
    for big, small in zip(chain, chain[1:]):
        assert small.issubspace(big)
    assert chain[-1].dim == 0
    for sub in chain[1:]:
        for a in sub.basis:
            assert K.combination(a)((0,) * corpus_alg.dim) == (0,) * corpus_alg.dim
    tower = prolong(corpus_alg, g0)
    assert identification_defects(K, tower) == []


def test_k0_normalises_filtration(corpus_alg):
    K, _ = _killing(corpus_alg)
    chain = killing_filtration(K)
    k0 = chain[1]
    for j, kj in enumerate(chain[1:]):
        for a, b in itertools.product(k0.basis, kj.basis):
            br = field_bracket(K.combination(a), K.combination(b))
            coords = K.coordinates(br)
            assert coords is not None and kj.contains(coords)


def test_contact_check_examples():
    h = heisenberg()
    dz = PolyVectorField([Poly(3), Poly(3), Poly.constant(3, 1)])
    assert contact_check(dz, h)
    xdz = PolyVectorField([Poly(3), Poly(3), Poly.variable(3, 0)])
    cert = contact_check(xdz, h)
    assert not cert
    assert any("Z~" in d for d in cert.details)


def test_left_frame_expansion_roundtrip():
    h = heisenberg()
    f = dag_fields(h)[0]
    coeffs = left_frame_coefficients(h, f)
    # X-dagger = X~ + y Z~ in the left frame
    assert coeffs[0] == Poly.constant(3, 1) and coeffs[1] == Poly(3)
    assert coeffs[2] == Poly.variable(3, 1)


def test_push_forward():
    h = heisenberg()
    K, _ = _killing(h)
    xd = K.basis[0]
    ident = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert push_forward(xd, ident, K) == xd
    pushed = push_forward(xd, ROT, K)
    horizontal = Subspace.coordinate([0, 1], 4)
    assert horizontal.contains(K.coordinates(pushed))
    with pytest.raises(ValueError):
        push_forward(xd, [[1, 0, 0], [1, 0, 0], [0, 0, 1]])


def test_push_forward_outside_killing_algebra():
    h = heisenberg()
    K, _ = _killing(h)
    stretch = [[2, 0, 0], [0, 1, 0], [0, 0, 2]]
    # automorphisms normalise the translations, so dag fields stay in K ...
    assert K.contains(push_forward(K.basis[0], stretch, K))
    # ... but a non-isometric one turns the rotation into a non-Killing field
    with pytest.raises(NotClosedError):
        push_forward(K.basis[3], stretch, K)


def test_field_span_coordinates():
    fields = dag_fields(heisenberg())
    span = FieldSpan(fields)
    combo = fields[0] * 2 + fields[2] * F(-1, 3)
    assert span.coordinates(combo) == (2, 0, F(-1, 3))
    assert span.coordinates(PolyVectorField([Poly.variable(3, 2), Poly(3), Poly(3)])) is None
