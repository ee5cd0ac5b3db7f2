import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carnotlie.algebra import abelian, bracket_vec, engel, free_nilpotent, heisenberg
from carnotlie.group_law import (
    NotAutomorphismError,
    automorphism_to_map,
    bch,
    dag_fields,
    dilation,
    dynkin_words,
    inverse_point,
    is_isometric_automorphism,
    left_fields,
    left_invariant_field,
    right_invariant_field,
)
from carnotlie.john import NormSpec
from carnotlie.polynomial import Poly, PolyVectorField, field_bracket

from conftest import CORPUS_ALGEBRAS

F = Fraction
ROT = [[F(3, 5), F(-4, 5), 0], [F(4, 5), F(3, 5), 0], [0, 0, 1]]

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def _comb(fields, coeffs):
    out = PolyVectorField.zero(fields[0].ambient_dim)
    for c, f in zip(coeffs, fields):
        if c:
            out = out + f * c
    return out


def test_bch_third_order_in_free_algebra():
    # X + Y + [X,Y]/2 + [X,[X,Y]]/12 - [Y,[X,Y]]/12 on the generators
    alg = free_nilpotent(2, 3)
    x, y = alg.basis_vector(0), alg.basis_vector(1)
    br = lambda a, b: bracket_vec(a, b, alg)
    xy = br(x, y)
    terms = [(1, x), (1, y), (F(1, 2), xy), (F(1, 12), br(x, xy)), (F(-1, 12), br(y, xy))]
    expected = tuple(sum(c * v[k] for c, v in terms) for k in range(alg.dim))
    assert bch(x, y, alg) == expected
    assert all(len(w) <= 3 for w, _ in dynkin_words(3))


def test_heisenberg_bch():
    h = heisenberg()
    x, y = (F(1), F(2), F(3)), (F(4), F(5), F(6))
    assert bch(x, y, h) == (5, 7, 3 + 6 + F(1 * 5 - 2 * 4, 2))
    assert bch(x, inverse_point(x), h) == (0, 0, 0)
    assert bch((0, 0, 0), y, h) == y


def test_abelian_bch_is_addition():
    a = abelian(3)
    assert bch((1, 2, 3), (F(1, 2), 0, -1), a) == (F(3, 2), 2, 2)


@pytest.mark.parametrize("alg", CORPUS_ALGEBRAS, ids=lambda a: a.name)
def test_associativity_and_dilation(alg):
    rng = random.Random(11)
    pt = lambda: tuple(F(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(alg.dim))
    for _ in range(20):
        x, y, z = pt(), pt(), pt()
        assert bch(bch(x, y, alg), z, alg) == bch(x, bch(y, z, alg), alg)
        lam = F(rng.choice([-3, -1, 2, 5]), rng.randint(1, 4))
        assert dilation(lam, bch(x, y, alg), alg) == bch(dilation(lam, x, alg), dilation(lam, y, alg), alg)


def test_dilation_examples():
    h = heisenberg()
    assert dilation(2, (1, 1, 1), h) == (2, 2, 4)
    assert dilation(1, (3, 4, 5), h) == (3, 4, 5)
    with pytest.raises(ValueError):
        dilation(0, (1, 1, 1), h)


def test_heisenberg_fields():
    h = heisenberg()
    n = 3
    x, y = Poly.variable(n, 0), Poly.variable(n, 1)
    one, zero = Poly.constant(n, 1), Poly(n)
    # with [X,Y] = Z and the product above, the y-correction is +y/2 for X-dagger
    assert right_invariant_field((1, 0, 0), h) == PolyVectorField([one, zero, y * F(1, 2)])
    assert left_invariant_field((1, 0, 0), h) == PolyVectorField([one, zero, y * F(-1, 2)])
    assert right_invariant_field((0, 1, 0), h) == PolyVectorField([zero, one, x * F(-1, 2)])
    xt, yt, zt = left_fields(h)
    assert field_bracket(xt, yt) == zt
    xd, yd, zd = dag_fields(h)
    assert field_bracket(xd, yd) == -zd


@pytest.mark.parametrize("alg", CORPUS_ALGEBRAS, ids=lambda a: a.name)
def test_dag_is_anti_homomorphism_and_tilde_homomorphism(alg):
    dag, til = dag_fields(alg), left_fields(alg)
    zero = (0,) * alg.dim
    for i in range(alg.dim):
        assert dag[i](zero) == alg.basis_vector(i)
        assert til[i](zero) == alg.basis_vector(i)
        for j in range(alg.dim):
            c = alg.bracket(alg.basis_vector(i), alg.basis_vector(j))
            assert field_bracket(dag[i], dag[j]) == -_comb(dag, c)
            assert field_bracket(til[i], til[j]) == _comb(til, c)
            assert not field_bracket(til[i], dag[j])


@pytest.mark.parametrize("alg", CORPUS_ALGEBRAS, ids=lambda a: a.name)
def test_weighted_homogeneity(alg):
    w = alg.weights
    for i, f in enumerate(dag_fields(alg) + left_fields(alg)):
        j = w[i % alg.dim]
        for k, p in enumerate(f.components):
            assert p.weighted_degrees(w) <= {w[k] - j}
            assert p.degree() <= alg.step


def test_dilation_pushes_dag_fields():
    alg = free_nilpotent(2, 3)
    lam = F(3, 2)
    inv = [Poly.variable(alg.dim, k) * lam ** (-alg.weights[k]) for k in range(alg.dim)]
    for i, f in enumerate(dag_fields(alg)):
        pushed = PolyVectorField(
            [f.components[k].substitute(inv) * lam ** alg.weights[k] for k in range(alg.dim)]
        )
        assert pushed == f * lam ** alg.weights[i]


@settings(max_examples=50, deadline=None)
@given(st.lists(rationals, min_size=12, max_size=12))
def test_engel_bch_properties(vals):
    alg = engel()
    x, y, z = vals[0:4], vals[4:8], vals[8:12]
    assert bch(bch(x, y, alg), z, alg) == bch(x, bch(y, z, alg), alg)
    assert bch(x, inverse_point(x), alg) == (0,) * 4
    # one-parameter subgroups commute
    assert bch(x, [2 * v for v in x], alg) == tuple(3 * F(v) for v in x)


def test_automorphisms():
    h = heisenberg()
    ident = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert automorphism_to_map(ident, h)((1, 2, 3)) == (1, 2, 3)
    phi = automorphism_to_map(ROT, h)
    assert phi.restriction(1) == ((F(3, 5), F(-4, 5)), (F(4, 5), F(3, 5)))
    with pytest.raises(NotAutomorphismError) as err:
        automorphism_to_map([[1, 0, 0], [0, 1, 0], [0, 0, -1]], h)
    assert err.value.pair == ("X", "Y")
    with pytest.raises(NotAutomorphismError, match="singular"):
        automorphism_to_map([[1, 0, 0], [1, 0, 0], [0, 0, 1]], h)
    with pytest.raises(NotAutomorphismError, match="strata"):
        automorphism_to_map([[1, 0, 1], [0, 1, 0], [0, 0, 1]], h)


def test_isometric_automorphisms():
    h = heisenberg()
    ident = NormSpec.identity(2)
    assert is_isometric_automorphism(ROT, h, ident)
    scaling = is_isometric_automorphism([[2, 0, 0], [0, F(1, 2), 0], [0, 0, 1]], h, ident)
    assert not scaling and scaling.details
    square = NormSpec.from_facets([[1, 0], [0, 1]])
    assert is_isometric_automorphism([[0, -1], [1, 0]], abelian(2), square)
    assert not is_isometric_automorphism([[F(3, 5), F(-4, 5)], [F(4, 5), F(3, 5)]], abelian(2), square)
