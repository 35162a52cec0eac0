from fractions import Fraction
from math import comb

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from lonogo.algebra import (
    I,
    ONE,
    ZERO,
    GaussianRational,
    MultiPoly,
    Variable,
    VariableSpace,
    compare_monomials,
    enumerate_monomials,
    format_gaussian,
    format_poly,
    gaussian_arith,
    grevlex_key,
    is_normalized,
    monomial_count,
    parse_gaussian,
    parse_gaussian_ex,
    parse_rational,
    parse_terms,
    poly_eval,
    poly_mul,
    serialize_terms,
    to_rational,
)
from lonogo.errors import ContractError, ParseError

rationals = st.builds(Fraction, st.integers(-99, 99), st.integers(1, 50))
gaussians = st.builds(GaussianRational, rationals, rationals)
nonzero_gaussians = gaussians.filter(bool)


def polys(nvars=3, max_terms=5, max_exp=2):
    exps = st.tuples(*[st.integers(0, max_exp)] * nvars)
    vs = VariableSpace.generic(nvars)
    return st.dictionaries(exps, gaussians, max_size=max_terms).map(lambda t: MultiPoly(vs, t))


# -- scalars


def test_modulus_identity():
    a = GaussianRational(Fraction(1, 2), Fraction(1, 2))
    b = GaussianRational(Fraction(1, 2), Fraction(-1, 2))
    assert a * b == GaussianRational(Fraction(1, 2))


def test_inverse_of_specific_value():
    a = GaussianRational(Fraction(3, 7), Fraction(2, 5))
    assert a * a.inverse() == ONE


def test_lowest_terms_on_construction():
    x = to_rational(Fraction(2, 4))
    assert x == mpq(1, 2) and is_normalized(x)
    assert to_rational(0).denominator == 1


def test_division_by_zero_raises():
    with pytest.raises(ZeroDivisionError):
        gaussian_arith(ONE, ZERO, "div")
    with pytest.raises(ZeroDivisionError):
        ZERO.inverse()


def test_unknown_kind_rejected():
    with pytest.raises(ContractError):
        gaussian_arith(ONE, ONE, "pow")


def test_floats_convert_exactly():
    assert to_rational(0.5) == mpq(1, 2)
    assert to_rational(0.1) == mpq(Fraction(0.1))


def test_i_squared():
    assert I * I == -ONE


def test_immutable():
    with pytest.raises(AttributeError):
        ONE.re = 2


@given(gaussians, nonzero_gaussians)
def test_field_inverse_law(a, b):
    assert (b * a) * b.inverse() == a
    assert gaussian_arith(gaussian_arith(a, b, "mul"), b, "div") == a


@given(gaussians, gaussians, gaussians)
def test_ring_laws(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == ZERO


@given(gaussians)
def test_components_stay_normalized(a):
    for x in (a.re, a.im, (a * a).re, (a * a).im):
        assert is_normalized(x)


@given(gaussians)
def test_gaussian_text_round_trip(a):
    assert parse_gaussian(format_gaussian(a)) == a


def test_gaussian_text_forms():
    assert format_gaussian(GaussianRational(Fraction(1, 2), -3)) == "1/2-3/1i"
    assert parse_gaussian("1/1+0/1i") == ONE
    assert parse_gaussian("-2") == GaussianRational(-2)
    assert parse_gaussian("3/4i") == GaussianRational(0, Fraction(3, 4))
    value, decimal = parse_gaussian_ex("0.5+0.25i")
    assert decimal and value == GaussianRational(Fraction(1, 2), Fraction(1, 4))
    assert parse_rational("6/8") == mpq(3, 4)
    with pytest.raises(ParseError):
        parse_gaussian("1/0")
    with pytest.raises(ParseError):
        parse_gaussian("abc")


# -- variables and monomials


def test_variable_space_rules():
    vs = VariableSpace.for_matrix([0, 1], 2, gamma=True)
    assert vs.names() == ["A1_1", "A1_2", "A2_1", "A2_2", "g"]
    assert vs.gamma_index == 4
    assert vs.entry(1, 0) == 2
    with pytest.raises(ContractError):
        VariableSpace([Variable("gamma"), Variable("A", 0, 0)])
    with pytest.raises(ContractError):
        VariableSpace([Variable("A", 0, 0), Variable("A", 0, 0)])


def test_up_to_count_v5_d3():
    assert len(enumerate_monomials(5, 3)) == 56 == comb(8, 3)


def test_degree_zero_is_single_tuple():
    assert enumerate_monomials(2, 0) == [(0, 0)]


@pytest.mark.parametrize("V,d", [(1, 4), (3, 3), (4, 2), (6, 2)])
def test_counts_match_binomials(V, d):
    assert len(enumerate_monomials(V, d, "up_to")) == comb(V + d, d) == monomial_count(V, d)
    assert len(enumerate_monomials(V, d, "exact")) == comb(V + d - 1, d)


def test_w_graded_filter():
    vs = VariableSpace.for_matrix([0], 4, gamma=True)
    graded = enumerate_monomials(vs, 8, "w_graded", n=3)
    oracle = [e for e in enumerate_monomials(vs, 8) if sum(e[:4]) == 3 * e[4]]
    assert graded == oracle
    assert {e[4] for e in graded} == {0, 1, 2}


def test_w_graded_needs_gamma_and_n():
    with pytest.raises(ContractError):
        enumerate_monomials(VariableSpace.generic(3), 2, "w_graded", n=2)
    vs = VariableSpace.for_matrix([0], 2, gamma=True)
    with pytest.raises(ContractError):
        enumerate_monomials(vs, 2, "w_graded")


def test_enumeration_limit_is_resource_error():
    from lonogo.errors import ResourceLimitError

    with pytest.raises(ResourceLimitError):
        enumerate_monomials(30, 10, limit=1000)


@given(st.integers(1, 4), st.integers(0, 4))
def test_enumeration_sorted_and_strict(V, d):
    monos = enumerate_monomials(V, d)
    keys = [grevlex_key(e) for e in monos]
    assert keys == sorted(keys)
    assert len(set(monos)) == len(monos)
    for a, b in zip(monos, monos[1:]):
        assert compare_monomials(a, b) == -1 and compare_monomials(b, a) == 1


# -- polynomials


@given(polys(), polys(), polys())
def test_poly_ring_laws(p, q, r):
    assert p + q == q + p
    assert poly_mul(p, q) == poly_mul(q, p)
    assert poly_mul(poly_mul(p, q), r) == poly_mul(p, poly_mul(q, r))
    assert poly_mul(p, q + r) == poly_mul(p, q) + poly_mul(p, r)


@given(polys(), polys())
def test_degree_is_additive(p, q):
    if p and q:
        assert poly_mul(p, q).degree() == p.degree() + q.degree()


@given(polys())
def test_no_zero_coefficients_stored(p):
    for q in (p, p - p, poly_mul(p, p), p + (-p)):
        assert all(c for c in q.terms.values())


@given(polys(), st.lists(gaussians, min_size=3, max_size=3), polys())
def test_evaluation_is_a_homomorphism(p, point, q):
    assert poly_eval(poly_mul(p, q), point) == poly_eval(p, point) * poly_eval(q, point)
    assert poly_eval(p + q, point) == poly_eval(p, point) + poly_eval(q, point)


@given(polys())
def test_term_serialization_round_trip(p):
    assert parse_terms(serialize_terms(p), p.vs) == p


def test_square_of_binomial():
    vs = VariableSpace.generic(2)
    x, y = MultiPoly.variable(vs, 0), MultiPoly.variable(vs, 1)
    p = poly_mul(x + y, x + y)
    assert p == MultiPoly(vs, {(2, 0): 1, (1, 1): 2, (0, 2): 1})
    assert p.is_homogeneous()
    assert format_poly(p) == "(1/1+0/1i)*A1_1^2 + (2/1+0/1i)*A1_1*A1_2 + (1/1+0/1i)*A1_2^2"


def test_eval_reports_missing_variable():
    vs = VariableSpace.for_matrix([0], 2, gamma=True)
    p = MultiPoly.variable(vs, 0) * MultiPoly.variable(vs, 2)
    assert poly_eval(p, {"A1_1": 2, "g": 3}) == GaussianRational(6)
    with pytest.raises(ContractError):
        poly_eval(p, {"A1_1": 2})


def test_mismatched_spaces_rejected():
    p = MultiPoly.constant(VariableSpace.generic(2), 1)
    q = MultiPoly.constant(VariableSpace.generic(3), 1)
    with pytest.raises(ContractError):
        p + q
