import pytest

from bpbv_engine.coeffring import ScalarRing, VPolynomial
from bpbv_engine.dickson import (
    SignedPoly,
    beta,
    beta_prime,
    beta_sec,
    check_all,
    det_character,
    dickson_parse,
    frobenius_twist,
    gl_act,
    last_nonzero_one_vectors,
    q_op,
    reduce_alpha_to_cohomology,
)
from bpbv_engine.errors import ConfigurationError, InvariantViolation, PreconditionError
from bpbv_engine.models import PASS
from bpbv_engine.series import SeriesRing


def test_exterior_generators_square_to_zero():
    for p in (2, 3):
        a0 = SignedPoly.a(p, 2, 0)
        a1 = SignedPoly.a(p, 2, 1)
        assert (a0 * a0).is_zero()
        assert a1 * a0 == -(a0 * a1)


def test_composite_prime_rejected():
    with pytest.raises(ConfigurationError):
        SignedPoly.one(4, 1)


def test_last_nonzero_one_vectors():
    assert last_nonzero_one_vectors(2, 2) == [(0, 1), (1, 0), (1, 1)]
    assert len(last_nonzero_one_vectors(3, 2)) == 4


def test_beta_renderings():
    assert beta(2, 2).render() == "x0*x1^2 + x0^2*x1"
    assert beta(3, 2).render() == "x0*x1^3 + 2*x0^3*x1"
    assert beta_sec(2, 1, 1).render() == "x0^2"
    with pytest.raises(ConfigurationError):
        beta(2, 0)


@pytest.mark.parametrize("p, k", [(2, 1), (2, 2), (2, 3), (3, 2), (5, 2)])
def test_beta_equals_moore_determinant(p, k):
    assert beta(p, k) == beta_prime(p, k)


@pytest.mark.parametrize("p, k, m", [(2, 1, 1), (2, 2, 0), (2, 2, 1), (3, 2, 1)])
def test_beta_sec_is_frobenius_power(p, k, m):
    assert beta_sec(p, m, k) == beta(p, k).power(p ** m)


def test_q_operations():
    p, k = 3, 2
    a0 = SignedPoly.a(p, k, 0)
    assert q_op(1, a0) == SignedPoly.x(p, k, 0, 3)
    assert q_op(0, SignedPoly.x(p, k, 1)).is_zero()
    top = dickson_parse("a0*a1*x0", p, k)
    assert q_op(2, q_op(2, top)).is_zero()
    assert frobenius_twist(q_op(0, top)) == q_op(1, frobenius_twist(top))
    with pytest.raises(ConfigurationError):
        q_op(-1, top)


def test_parse_applies_exterior_signs():
    assert dickson_parse("a1*a0", 3, 2).render() == "2*a0*a1"
    b = beta(3, 2)
    assert dickson_parse(b.render(), 3, 2) == b
    assert dickson_parse("0", 3, 2).is_zero()


def test_gl_action_and_determinant():
    swap = [[0, 1], [1, 0]]
    b_prime = beta_prime(3, 2)
    assert det_character(swap, 3) == 2
    assert gl_act(swap, b_prime) == b_prime.scale(2)
    with pytest.raises(PreconditionError):
        det_character([[1, 1], [1, 1]], 3)
    with pytest.raises(ConfigurationError):
        gl_act([[1]], b_prime)


@pytest.mark.parametrize("p, k, m", [(2, 2, 0), (2, 2, 1), (3, 2, 1), (2, 3, 1)])
def test_check_all_passes(p, k, m):
    outcomes = check_all(p, k, m, seed=7, samples=6)
    assert outcomes
    assert [o.name for o in outcomes if o.status != PASS] == []


def test_check_all_is_reproducible():
    first = [(o.name, o.status) for o in check_all(3, 2, 1, seed=11, samples=4)]
    second = [(o.name, o.status) for o in check_all(3, 2, 1, seed=11, samples=4)]
    assert first == second


def test_reduce_alpha_to_cohomology():
    f2 = ScalarRing.prime_field(2)
    ring = SeriesRing(("x0",), f2, 1, 1)
    assert reduce_alpha_to_cohomology(ring.var("x0", 6, 2)).render() == "x0^2"
    v1 = VPolynomial.generator(f2, 1, 1, 1)
    with pytest.raises(InvariantViolation):
        reduce_alpha_to_cohomology(ring.var("x0", 6, 3).scale(v1))
    rational = SeriesRing(("x0",), ScalarRing.rationals(2), 1, 1)
    with pytest.raises(ConfigurationError):
        reduce_alpha_to_cohomology(rational.var("x0", 6, 2))
