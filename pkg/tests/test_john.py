import math
from fractions import Fraction

import numpy as np
import pytest

from carnotlie.algebra import ParseError
from carnotlie.john import (
    DegeneratePointSetError,
    Ellipsoid,
    NormError,
    NormSpec,
    equivariance_residual,
    facet_symmetries,
    format_norm,
    gram_from_norm,
    inner_john,
    mvee,
    parse_norm,
)

from conftest import DATA

F = Fraction
SQUARE = NormSpec.from_facets([[1, 0], [0, 1]])
L1 = NormSpec.from_facets([[1, 1], [1, -1]])
RECT = NormSpec.from_facets([[1, 0], [0, F(1, 2)]])
HEXAGON = NormSpec.from_facets([[1, 0], [0, 1], [1, 1]])
OCTAGON = NormSpec.from_facets([[1, 0], [0, 1], [F(1, 2), F(1, 2)], [F(1, 2), F(-1, 2)]])
CUBE = NormSpec.from_facets([[1, 0, 0], [0, 1, 0], [0, 0, 1]])


def test_mvee_examples():
    e = mvee([[1, 0], [-1, 0], [0, 1], [0, -1]])
    assert np.allclose(e.Q, np.eye(2), atol=1e-8)
    e = mvee([[1, 1], [-1, -1], [1, -1], [-1, 1]])
    assert np.allclose(e.semi_axes(), [math.sqrt(2)] * 2, atol=1e-8)


def test_mvee_degenerate_names_subspace():
    with pytest.raises(DegeneratePointSetError) as err:
        mvee([[1, 0], [-1, 0]])
    d = err.value.deficient
    assert d.shape == (1, 2) and abs(abs(d[0, 1]) - 1) < 1e-12


def test_mvee_input_checks():
    with pytest.raises(ValueError):
        mvee([[1, 0], [0, 1]], eps=0)
    with pytest.raises(ValueError):
        mvee(np.eye(7))


def test_inner_john_examples():
    assert np.allclose(inner_john(SQUARE).Q, np.eye(2), atol=1e-8)
    assert np.allclose(inner_john(L1).Q, 0.5 * np.eye(2), atol=1e-8)
    assert np.allclose(inner_john(RECT).semi_axes(), [1, 2], atol=1e-8)


@pytest.mark.parametrize("norm", [SQUARE, L1, RECT, HEXAGON, OCTAGON, CUBE])
def test_inscribed_and_equivariant(norm):
    e = inner_john(norm, 1e-9)
    a = np.array([[float(x) for x in f] for f in norm.facets])
    assert np.max(np.einsum("ij,jk,ik->i", a, e.Q, a)) <= 1 + 1e-9
    syms = facet_symmetries(norm)
    assert syms
    for t in syms:
        assert equivariance_residual(norm, e.Q, t) <= 1e-8


def test_symmetry_counts():
    assert len(facet_symmetries(SQUARE)) == 8
    assert len(facet_symmetries(HEXAGON)) == 12
    # a rational octagon cannot be affinely regular; only the square symmetries survive
    assert len(facet_symmetries(OCTAGON)) == 8
    assert len(facet_symmetries(CUBE)) == 48


def test_dilation_covariance():
    t = 3.0
    scaled = NormSpec.from_facets([[3, 0], [0, F(3, 2)]])
    assert np.allclose(inner_john(scaled).Q, inner_john(RECT).Q / t**2, atol=1e-9)


def test_facet_order_independence():
    a = inner_john(HEXAGON).Q
    b = inner_john(NormSpec.from_facets([[1, 1], [1, 0], [0, 1]])).Q
    assert np.max(np.abs(a - b)) <= 1e-8


def test_gram_from_norm():
    ident = NormSpec.identity(2)
    assert gram_from_norm(ident) == ident.gram
    assert gram_from_norm(SQUARE) == ((1, 0), (0, 1))
    assert gram_from_norm(L1) == ((2, 0), (0, 2))
    assert gram_from_norm(RECT) == ((1, 0), (0, F(1, 4)))
    g = gram_from_norm(HEXAGON)
    assert g == ((F(4, 3), F(2, 3)), (F(2, 3), F(4, 3)))


def test_norm_validation():
    with pytest.raises(NormError):
        NormSpec.from_facets([[1, 0]])
    with pytest.raises(NormError):
        NormSpec.from_facets([[1, 0], [0, 1], [-1, 0]])
    with pytest.raises(NormError):
        NormSpec.from_gram([[1, 2], [2, 1]])
    with pytest.raises(NormError):
        NormSpec.from_facets([[0, 0], [0, 1]])


def test_ellipsoid_invariants():
    with pytest.raises(ValueError):
        Ellipsoid(np.array([[1.0, 0.5], [0.0, 1.0]]), 0.0)
    with pytest.raises(ValueError):
        Ellipsoid(np.array([[1.0, 0.0], [0.0, -1.0]]), 0.0)


def test_norm_files():
    for path in sorted(DATA.parent.parent.glob("src/carnotlie/data/*.norm")):
        norm = parse_norm(path.read_text())
        assert parse_norm(format_norm(norm)) == norm
    with pytest.raises(ParseError) as err:
        parse_norm("norm: polytope\n1 0\n0 x\n")
    assert err.value.line == 3
    with pytest.raises(ParseError):
        parse_norm("norm: disk\n")
