import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sos_certify import (
    CHEBYSHEV_1D,
    MONOMIAL_1D,
    MONOMIAL_2D,
    BasisSpec,
    LagrangeBasis,
    NodeScheme,
    PointSet,
    barycentric,
    eval_basis,
    eval_poly,
    lagrange_vector,
    make_points_segment,
    make_points_triangle,
)
from sos_certify.basis import Domain, basis_matrix, graded_exponents
from sos_certify.errors import InvalidInput, NotUnisolvent


def test_chebyshev_endpoints():
    np.testing.assert_allclose(eval_basis(CHEBYSHEV_1D, 2, 0.0), [1, -1, 1])
    np.testing.assert_allclose(eval_basis(CHEBYSHEV_1D, 2, 1.0), [1, 1, 1])


def test_chebyshev_defining_relation():
    theta = np.linspace(0, np.pi, 13)
    x = (np.cos(theta) + 1) / 2
    T = basis_matrix(CHEBYSHEV_1D, 9, x)
    np.testing.assert_allclose(T, np.cos(np.outer(theta, np.arange(10))), atol=1e-13)


def test_chebyshev_recurrence(rng):
    x = rng.uniform(0, 1, 50)
    T = basis_matrix(CHEBYSHEV_1D, 21, x)
    for i in range(1, 21):
        rhs = 2 * (2 * x - 1) * T[:, i] - T[:, i - 1]
        assert np.max(np.abs(T[:, i + 1] - rhs)) <= 1e-11


def test_monomial2d_graded_lex():
    np.testing.assert_allclose(eval_basis(MONOMIAL_2D, 1, (0.5, 0.25)), [1, 0.5, 0.25])
    assert graded_exponents(2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert len(eval_basis(MONOMIAL_2D, 4, (0.1, 0.2))) == 15


def test_basis_spec_dimension():
    with pytest.raises(InvalidInput):
        BasisSpec("monomial2d", 1)
    with pytest.raises(InvalidInput):
        BasisSpec("chebyshev", 2)
    assert BasisSpec("monomial").dimension == 1


def test_eval_basis_dimension_mismatch():
    with pytest.raises(InvalidInput):
        eval_basis(MONOMIAL_1D, 2, (0.1, 0.2))
    with pytest.raises(InvalidInput):
        eval_basis(MONOMIAL_2D, 2, 0.3)


def test_barycentric():
    assert barycentric((0, 0)) == (1, 0, 0)
    assert barycentric((1, 0)) == (0, 1, 0)
    np.testing.assert_allclose(barycentric((1 / 3, 1 / 3)), [1 / 3] * 3)


def test_segment_points():
    np.testing.assert_array_equal(make_points_segment(1).nodes, [0, 1])
    np.testing.assert_array_equal(make_points_segment(2).nodes, [0, 0.5, 1])
    assert len(make_points_segment(5)) == 6
    cheb = make_points_segment(4, NodeScheme.CHEBYSHEV).nodes
    r = np.arange(5)
    np.testing.assert_allclose(cheb, (1 + np.cos((2 * r + 1) * np.pi / 10)) / 2)
    with pytest.raises(InvalidInput):
        make_points_segment(0)


def test_triangle_points():
    np.testing.assert_array_equal(make_points_triangle(1).nodes, [[0, 0], [1, 0], [0, 1]])
    assert len(make_points_triangle(4)) == 15
    assert len(make_points_triangle(8)) == 45
    for n in range(1, 11):
        assert len(make_points_triangle(n)) == (n + 1) * (n + 2) // 2
    with pytest.raises(InvalidInput):
        make_points_triangle(0)


def test_pointset_validation():
    with pytest.raises(InvalidInput):
        PointSet([0.0, 0.0], Domain.SEGMENT, 1)
    with pytest.raises(InvalidInput):
        PointSet([0.0, 1.5], Domain.SEGMENT, 1)
    with pytest.raises(InvalidInput):
        PointSet([0.0, 0.5], Domain.SEGMENT, 2)
    with pytest.raises(InvalidInput):
        PointSet([[0, 0], [1, 0], [0.6, 0.6]], Domain.TRIANGLE, 1)


def test_lagrange_affine():
    np.testing.assert_allclose(
        lagrange_vector(make_points_segment(1), MONOMIAL_1D, 1, 0.25), [0.75, 0.25]
    )


@pytest.mark.parametrize("spec,pts", [
    (MONOMIAL_1D, make_points_segment(7)),
    (CHEBYSHEV_1D, make_points_segment(12, "chebyshev")),
    (MONOMIAL_2D, make_points_triangle(5)),
])
def test_lagrange_nodes_and_partition_of_unity(spec, pts, rng):
    n = pts.degree
    lag = LagrangeBasis(pts, spec, n)
    np.testing.assert_allclose(lag(pts.nodes), np.eye(len(pts)), atol=1e-10)
    if spec.dimension == 1:
        xs = rng.uniform(0, 1, 100)
    else:
        xs = rng.dirichlet(np.ones(3), 100)[:, 1:]
    assert np.max(np.abs(lag(xs).sum(axis=1) - 1)) <= 1e-10
    # reproduction of a random polynomial of degree n
    c = rng.normal(size=spec.size(n))
    exact = eval_poly(c, spec, n, xs)
    interp = lag(xs) @ eval_poly(c, spec, n, pts.nodes)
    assert np.max(np.abs(interp - exact)) <= 1e-9 * np.max(np.abs(exact))


def test_not_unisolvent():
    # six points on the line y = x cannot carry quadratics in two variables
    nodes = np.array([[0.0, 0.0], [0.1, 0.1], [0.2, 0.2], [0.3, 0.3], [0.4, 0.4], [0.5, 0.5]])
    pts = PointSet(nodes, Domain.TRIANGLE, 2)
    with pytest.raises(NotUnisolvent):
        LagrangeBasis(pts, MONOMIAL_2D, 2)


def test_eval_poly_examples(rng):
    assert eval_poly([1, 0, 0, 0], MONOMIAL_1D, 3, 0.7) == 1.0
    assert eval_poly([0, 1, 0], MONOMIAL_1D, 2, 0.3) == pytest.approx(0.3)
    with pytest.raises(InvalidInput):
        eval_poly([1, 2], MONOMIAL_1D, 3, 0.1)
    c = rng.normal(size=8)
    x = 0.4
    horner = 0.0
    for a in c[::-1]:
        horner = horner * x + a
    assert eval_poly(c, MONOMIAL_1D, 7, x) == pytest.approx(horner, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 9), st.floats(0, 1), st.floats(0, 1))
def test_monomial2d_matches_products(k, a, b):
    x, y = a * (1 - b), b * (1 - a)
    vals = eval_basis(MONOMIAL_2D, k, (x, y))
    expect = [x**i * y**j for i, j in graded_exponents(k)]
    np.testing.assert_allclose(vals, expect, rtol=1e-12, atol=1e-300)
