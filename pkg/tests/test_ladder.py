import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvvqe.gaussian import GaussianParams, bogoliubov_of
from cvvqe.ladder import (
    LadderOp,
    LadderPolynomial,
    a,
    adag,
    conjugate_by_gaussian,
    format_polynomial,
    ipag_reduce,
    ipag_term_bound,
    multiply,
    number,
    ops_product,
    parse_polynomial,
)

op = st.tuples(st.integers(0, 2), st.booleans())
coeff = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@st.composite
def polynomials(draw):
    terms = draw(st.lists(st.tuples(st.lists(op, max_size=4), coeff), max_size=4))
    p = LadderPolynomial.scalar(0)
    for ops, c in terms:
        p = p + LadderPolynomial.monomial([LadderOp(*o) for o in ops], c)
    return p


def test_ladder_op_text():
    assert str(LadderOp(0, True)) == "a'(1)"
    assert str(LadderOp(2, False)) == "a(3)"


def test_number_and_products():
    assert number(0) == adag(0) * a(0)
    assert (2 * number(1)).terms[(LadderOp(1, True), LadderOp(1, False))] == 2
    assert ops_product([(0, True), (1, False)]) == adag(0) * a(1)
    assert not (a(0) - a(0))


@settings(max_examples=50, deadline=None)
@given(polynomials(), polynomials(), polynomials())
def test_algebra_laws(p, q, r):
    assert multiply(multiply(p, q), r).isclose(multiply(p, multiply(q, r)), tol=1e-9)
    assert p.dagger().dagger().isclose(p)
    assert (p * q).dagger().isclose(q.dagger() * p.dagger(), tol=1e-9)
    assert (p + q).isclose(q + p)


@settings(max_examples=50, deadline=None)
@given(polynomials())
def test_text_roundtrip(p):
    assert parse_polynomial(format_polynomial(p)).isclose(p, tol=1e-12)


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        parse_polynomial("1.0 * b(1)")


def test_conjugation_substitutes_linear_map():
    bmap = bogoliubov_of(GaussianParams([0.4], [0.0]))
    out = conjugate_by_gaussian(a(0), bmap)
    assert out.terms[(LadderOp(0, False),)] == pytest.approx(np.cosh(0.4))
    assert out.terms[(LadderOp(0, True),)] == pytest.approx(-np.sinh(0.4))


def test_conjugation_is_a_homomorphism(rng):
    bmap = bogoliubov_of(GaussianParams(rng.uniform(-0.5, 0.5, 2), rng.uniform(0, 6, 4)))
    p, q = a(0) + 0.5 * adag(1), number(1) + a(0)
    lhs = conjugate_by_gaussian(p * q, bmap)
    rhs = conjugate_by_gaussian(p, bmap) * conjugate_by_gaussian(q, bmap)
    assert lhs.isclose(rhs, tol=1e-10)


def test_ipag_single_layer_is_identity_reduction():
    g = GaussianParams([0.3, -0.2], [0.1, 0.2, 0.3, 0.4])
    bmap, prep = ipag_reduce([(g, a(0))])
    assert prep.isclose(a(0))
    assert np.allclose(bmap.E, bogoliubov_of(g).E)


def test_ipag_term_bound_holds():
    layers = [(GaussianParams([0.3, 0.1], [0.5, 0.2, 0.1, 0.3]), a(0) * a(1)) for _ in range(3)]
    _, prep = ipag_reduce(layers)
    assert len(prep) <= ipag_term_bound(layers, 2)
