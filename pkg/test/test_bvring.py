import pytest

from bpbv_engine.bvring import BVRing, alpha_degree, filtration_truncation
from bpbv_engine.errors import ConfigurationError
from bpbv_engine.models import FAIL, PASS, UNDECIDED
from bpbv_engine.slices import MembershipCertificate, quotient_slice

GRID = [
    (2, 1, 1),
    (2, 1, 2),
    (3, 1, 1),
    pytest.param(3, 1, 2, marks=pytest.mark.slow),
    pytest.param(2, 2, 2, marks=pytest.mark.slow),
    (2, 0, 1),
    (3, 0, 1),
]


def test_degrees_and_truncations():
    assert alpha_degree(2, 1, 1) == 4
    assert alpha_degree(2, 0, 2) == 6
    assert alpha_degree(3, 1, 1) == 6
    assert filtration_truncation(2, 1, 1) == 8
    assert filtration_truncation(2, 1, 2) == 12


def test_m_out_of_range(law_for):
    with pytest.raises(ConfigurationError):
        BVRing(law_for(2, 1), 2)


def test_k_beyond_w_rejected(bvring_for):
    bv = bvring_for(2, 1, 1)
    with pytest.raises(ConfigurationError):
        bv.presentation(2)
    with pytest.raises(ConfigurationError):
        bv.chi(2, 1)


def test_alpha_height_one(bvring_for):
    bv = bvring_for(2, 1, 1)
    assert bv.alpha().render() == "x0^2"
    assert bv.alpha_degree == 4
    assert bv.alpha().homogeneous_degree() == 4
    assert bv.alpha_computation.certificate is None


def test_alpha_products_agree_at_odd_prime(bvring_for):
    bv = bvring_for(3, 1, 1)
    assert bv.alpha().render() == "x0^3"
    assert bv.alpha_computation.certificate is None


@pytest.mark.parametrize("p, m, n", GRID)
def test_alpha_prime_matches_alpha(bvring_for, p, m, n):
    bv = bvring_for(p, m, n)
    result = bv.alpha_difference_certificate()
    assert isinstance(result, MembershipCertificate)
    assert result.verify()
    assert bv.alpha_prime().homogeneous_degree() == bv.alpha_degree


@pytest.mark.parametrize("p, m, n", GRID)
def test_v_alpha_prime_cofactor_expansion(bvring_for, p, m, n):
    bv = bvring_for(p, m, n)
    for i in range(m, n + 1):
        assert bv.v_alpha_prime_certificate(i).verify()
    with pytest.raises(ConfigurationError):
        bv.v_alpha_prime_certificate(n + 1)


@pytest.mark.parametrize("p, m, n", [(2, 1, 1), (3, 1, 1), (2, 0, 1)])
def test_alpha_reduces_to_dickson_power(bvring_for, p, m, n):
    outcome = bvring_for(p, m, n).mod_ideal_check()
    assert outcome.status == PASS, outcome.detail


def test_quotient_slice_of_bv1(bvring_for):
    sliced = quotient_slice(bvring_for(2, 1, 1).presentation(1), 2, cap=4)
    assert sliced.dimension == 4
    assert sliced.quotient_length == 1
    assert sliced.quotient_monomials() == [((1,), ())]


def test_a_ring_needs_room(bvring_for):
    with pytest.raises(ConfigurationError):
        bvring_for(2, 1, 1).a_ring(1)


def test_a_ring_zero_for_araki(law_for):
    bv = BVRing(law_for(2, 1, "araki"), 1)
    assert bv.theta(0).render() == "v1*y"
    assert bv.psi(0).render() == "v1"
    assert bv.theta_check(0).status == PASS
    assert bv.psi_theta_check(0).status == PASS


@pytest.mark.parametrize("flavor", ["hazewinkel", "araki"])
def test_theta_identities_at_top(bvring_for, flavor):
    bv = bvring_for(2, 1, 1, flavor, filtration=True)
    assert bv.D == 8
    for outcome in (bv.theta_check(1), bv.psi_theta_check(1), bv.top_quotient_check()):
        assert outcome.status == PASS, outcome.detail


def test_chi_psi_products(bvring_for):
    bv = bvring_for(2, 1, 1, filtration=True)
    assert bv.chi(0).render() == "1"
    assert bv.chi(1).render() == "x0^2"
    outcome = bv.chi_psi_check(1)
    assert outcome.status == PASS, outcome.detail
    assert outcome.sizes["certificates"] == 1


@pytest.mark.parametrize("degree", [0, 4])
def test_weierstrass_rank(bvring_for, degree):
    outcome = bvring_for(2, 1, 1).weierstrass_rank_check(0, degree)
    assert outcome.status == PASS, outcome.detail


def test_v_m_regular_on_coefficients(bvring_for):
    outcomes = bvring_for(2, 1, 1).chromatic_depth_check(0, -2)
    assert [outcome.status for outcome in outcomes] == [PASS]


@pytest.mark.parametrize("degree", [2, 4])
def test_slice_checks_never_fail(bvring_for, degree):
    bv = bvring_for(2, 1, 1, filtration=True)
    assert bv.annihilator_slice_check(1, degree).status != FAIL
    assert bv.vm_regularity_check(1, degree).status != FAIL


def test_a_ring_recursion_reports_sizes(bvring_for):
    outcome = bvring_for(2, 1, 1, filtration=True).a_ring_recursion_check(1, 2)
    assert outcome.name == "A(1)* ideal recursion in degree 2"
    assert outcome.status == PASS, outcome.detail
    assert outcome.sizes["slice"] > 0


def _assert_kernel_pass(outcome):
    assert outcome.status == PASS, outcome.detail
    assert outcome.sizes["kernel_rank"] == outcome.sizes["expected_rank"]


@pytest.mark.slow
def test_height_two_filtration_slices(bvring_for):
    bv = bvring_for(2, 1, 2, filtration=True)
    assert bv.D == 12
    for j in (1, 2):
        outcome = bv.chi_psi_check(j)
        assert outcome.status == PASS, outcome.detail
        assert outcome.sizes["certificates"] == j
    for degree in range(-24, 25, 2):
        for j in (1, 2):
            outcome = bv.annihilator_slice_check(j, degree)
            if (j, degree) == (2, 16):
                # the only slice where the cap leaves extra kernel elements
                assert outcome.status == UNDECIDED
                assert outcome.sizes["kernel_rank"] > outcome.sizes["expected_rank"]
            else:
                _assert_kernel_pass(outcome)
        for k in (1, 2):
            _assert_kernel_pass(bv.vm_regularity_check(k, degree))
            assert bv.a_ring_recursion_check(k, degree).status == PASS
        for outcome in bv.chromatic_depth_check(1, degree):
            _assert_kernel_pass(outcome)
        for j in (0, 1):
            assert bv.weierstrass_rank_check(j, degree).status == PASS


@pytest.mark.slow
@pytest.mark.parametrize("p, m, n", [(3, 1, 2), (2, 2, 2)])
def test_larger_grid_points(bvring_for, p, m, n):
    bv = bvring_for(p, m, n)
    assert bv.mod_ideal_check().status == PASS
    assert isinstance(bv.alpha_difference_certificate(), MembershipCertificate)
