import logging
from fractions import Fraction

import pytest

from bpbv_engine import coeffring
from bpbv_engine.coeffring import (
    ScalarRing,
    VPolynomial,
    coefficient_ring,
    v_monomials_of_weight,
    vkey_mul,
    vp_arith,
    vp_parse,
    vp_reduce,
    vp_split_top,
)
from bpbv_engine.errors import ConfigurationError, InvariantViolation, NonIntegralError


def v(scalars, lo, hi, index):
    return VPolynomial.generator(scalars, lo, hi, index)


def test_composite_prime_rejected():
    with pytest.raises(ConfigurationError):
        ScalarRing.prime_field(4)


def test_reduce_from_rationals_checks_integrality():
    f2 = ScalarRing.prime_field(2)
    rationals = ScalarRing.rationals(2)
    assert f2.reduce_from(Fraction(1, 3), rationals) == 1
    assert ScalarRing.integers_mod(2, 3).reduce_from(Fraction(5, 3), rationals) == 5 * 3 % 8
    with pytest.raises(NonIntegralError):
        f2.reduce_from(Fraction(1, 2), rationals)


def test_vkey_mul_merges_exponents():
    assert vkey_mul(((1, 2),), ((1, 1), (3, 1))) == ((1, 3), (3, 1))
    assert vkey_mul((), ((2, 1),)) == ((2, 1),)


def test_monomials_of_weight_are_canonical():
    # |v1| = -2, |v2| = -6 at p = 2
    assert v_monomials_of_weight(3, 1, 2, 2) == [((1, 3),), ((2, 1),)]
    assert v_monomials_of_weight(0, 1, 2, 2) == [()]
    assert v_monomials_of_weight(-1, 1, 2, 2) == []
    assert v_monomials_of_weight(3, 2, 2, 2) == [((2, 1),)]


def test_frobenius_in_characteristic_p():
    f2 = ScalarRing.prime_field(2)
    a = v(f2, 1, 2, 1) + v(f2, 1, 2, 2)
    assert a ** 2 == v(f2, 1, 2, 1) ** 2 + v(f2, 1, 2, 2) ** 2


def test_chain_ring_arithmetic():
    z4 = ScalarRing.integers_mod(2, 2)
    two_v1 = v(z4, 1, 1, 1).scale(2)
    assert (two_v1 * two_v1).is_zero()
    assert (two_v1 + two_v1).is_zero()
    assert v(z4, 1, 1, 0) == 2


def test_render_and_parse():
    z4 = ScalarRing.integers_mod(2, 2)
    poly = v(z4, 1, 2, 1).scale(3) + v(z4, 1, 2, 2) + 2
    assert poly.render() == "2 + 3*v1 + v2"
    assert vp_parse(poly.render(), z4, 1, 2) == poly
    assert vp_parse("0", z4, 1, 2).is_zero()


def test_reduce_modulo_invariant_ideals():
    z4 = ScalarRing.integers_mod(2, 2)
    poly = v(z4, 1, 2, 1) + v(z4, 1, 2, 2).scale(3) + 2
    reduced = vp_reduce(poly, 1)
    assert reduced.scalars == ScalarRing.prime_field(2)
    assert reduced.render() == "v1 + v2"
    assert vp_reduce(poly, 2).render() == "v2"
    assert vp_reduce(poly, 3).is_zero()


def test_degrees():
    f2 = ScalarRing.prime_field(2)
    poly = v(f2, 1, 2, 1) ** 3 + v(f2, 1, 2, 2)
    assert poly.degree() == -6
    assert v(f2, 1, 2, 1).degree() == -2
    assert VPolynomial.zero(f2, 1, 2).degree() is None


def test_split_top_divides_by_the_largest_generator():
    f2 = ScalarRing.prime_field(2)
    v1, v2 = v(f2, 1, 2, 1), v(f2, 1, 2, 2)
    parts = dict(vp_split_top(v1 * v2 + v1 ** 2))
    assert parts[2] == v1
    assert parts[1] == v1


def test_mixed_rings_rejected():
    with pytest.raises(ConfigurationError):
        v(ScalarRing.prime_field(2), 1, 2, 1) + v(ScalarRing.prime_field(3), 1, 2, 1)
    with pytest.raises(ConfigurationError):
        VPolynomial(ScalarRing.prime_field(2), 2, 3, {((1, 1),): 1})


@pytest.mark.parametrize(
    "m, expected",
    [(0, ("integers_mod", 1, 2)), (1, ("prime_field", 1, 2)), (2, ("prime_field", 2, 2))],
)
def test_coefficient_ring(m, expected):
    scalars, lo, hi = coefficient_ring(2, m, 2, 6)
    assert (scalars.kind, lo, hi) == expected


def test_coefficient_ring_range():
    with pytest.raises(ConfigurationError):
        coefficient_ring(2, 3, 2, 6)


def test_arith_over_prime_field():
    f2 = ScalarRing.prime_field(2)
    v1, v2 = v(f2, 1, 2, 1), v(f2, 1, 2, 2)
    assert vp_arith(v1, v1, "add").is_zero()
    product = vp_arith(vp_arith(v1, v2, "add"), v1, "mul")
    assert product == v1 ** 2 + v1 * v2
    assert vp_arith(v1, v2, "mul").degree() == -8
    assert vp_arith(v2, 3, "scalar-mul") == v2


def test_arith_carries_in_chain_ring():
    z8 = ScalarRing.integers_mod(2, 3)
    five = VPolynomial.constant(z8, 1, 1, 5)
    assert vp_arith(five, five, "add") == 2
    four_v1 = v(z8, 1, 1, 1).scale(4)
    assert vp_arith(four_v1, four_v1, "add").is_zero()
    assert vp_arith(four_v1, v(z8, 1, 1, 1).scale(2), "mul").is_zero()
    assert vp_arith(v(z8, 1, 1, 1), 6, "scalar-mul").render() == "6*v1"


def test_arith_rejects_bad_operands():
    f2 = ScalarRing.prime_field(2)
    v1 = v(f2, 1, 2, 1)
    with pytest.raises(ConfigurationError):
        vp_arith(v1, v(ScalarRing.prime_field(3), 1, 2, 1), "mul")
    with pytest.raises(ConfigurationError):
        vp_arith(v1, 1, "add")
    with pytest.raises(ConfigurationError):
        vp_arith(v1, v1, "div")


def test_debug_mode_checks_degree_bookkeeping(monkeypatch, caplog):
    f2 = ScalarRing.prime_field(2)
    v1, v2 = v(f2, 1, 2, 1), v(f2, 1, 2, 2)
    with caplog.at_level(logging.DEBUG, logger="bpbv_engine.coeffring"):
        assert vp_arith(v1, v2, "mul").degree() == -8
        assert vp_reduce(v1 * v2 + v2, 2) == v2

    monkeypatch.setattr(coeffring, "poly_mul", lambda a, b, scalars: {((1, 1),): 1})
    assert vp_arith(v1, v2, "mul") == v1
    with caplog.at_level(logging.DEBUG, logger="bpbv_engine.coeffring"):
        with pytest.raises(InvariantViolation):
            vp_arith(v1, v2, "mul")
