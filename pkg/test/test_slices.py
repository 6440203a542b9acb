import json

import pytest

from bpbv_engine.coeffring import ScalarRing, VPolynomial
from bpbv_engine.errors import ConfigurationError
from bpbv_engine.models import FAIL, PASS
from bpbv_engine.series import SeriesRing
from bpbv_engine.slices import (
    MembershipCertificate,
    NotFound,
    QuotientPresentation,
    compare_kernel,
    ideal_member,
    ideal_rows,
    multiplication_kernel,
    quotient_slice,
    recheck_certificate,
    slice_basis,
)

F2 = ScalarRing.prime_field(2)
PREC = 10


@pytest.fixture
def ring():
    return SeriesRing(("x",), F2, 1, 1)


@pytest.fixture
def pres(ring):
    # F_2[v1][[x]] / (v1 x^2)
    v1 = VPolynomial.generator(F2, 1, 1, 1)
    g = ring.var("x", PREC, 2).scale(v1)
    return QuotientPresentation.build(ring, [g], ["[2](x)"], truncation=PREC)


def test_slice_basis_enumeration(ring):
    basis = slice_basis(ring, 2, 4)
    assert len(basis) == 4
    assert basis.monomials[0] == ((1,), ())
    assert len(slice_basis(ring, 3, 4)) == 0
    assert len(slice_basis(ring, 2, -1)) == 0


def test_presentation_cutoff(pres):
    assert pres.degrees == (2,)
    assert pres.orders == (2,)
    assert pres.effective_cutoff() == PREC - 2


def test_quotient_slice(pres):
    result = quotient_slice(pres, 2, cap=4)
    assert result.dimension == 4
    assert result.rank == 3
    assert result.quotient_length == 1
    assert result.quotient_monomials() == [((1,), ())]


def test_membership_certificate(ring, pres):
    v1 = VPolynomial.generator(F2, 1, 1, 1)
    z = ring.var("x", PREC, 3).scale(v1 ** 2)
    certificate = ideal_member(z, pres)
    assert isinstance(certificate, MembershipCertificate)
    assert certificate.cutoff == PREC - 2
    assert certificate.verify()
    assert certificate.multipliers[0] == ring.var("x", PREC - 4).scale(v1)
    payload = json.loads(json.dumps(certificate.to_payload()))
    assert recheck_certificate(payload)
    assert recheck_certificate({"certificates": [payload, payload]})


def test_tampered_certificate_fails_recheck(ring, pres):
    v1 = VPolynomial.generator(F2, 1, 1, 1)
    certificate = ideal_member(ring.var("x", PREC, 3).scale(v1 ** 2), pres)
    payload = certificate.to_payload()
    payload["multipliers"] = [ring.zero(PREC - 4).to_payload()]
    assert not recheck_certificate(payload)
    with pytest.raises(ConfigurationError):
        MembershipCertificate.from_payload({**payload, "kind": "identity"})


def test_zero_is_always_a_member(ring, pres):
    certificate = ideal_member(ring.zero(PREC), pres)
    assert isinstance(certificate, MembershipCertificate)
    assert certificate.verify()


def test_non_member_is_not_found(ring, pres):
    result = ideal_member(ring.var("x", PREC), pres)
    assert isinstance(result, NotFound)
    assert result.degree == 2
    assert result.cutoff == PREC - 2


def test_cutoff_beyond_truncation_rejected(ring, pres):
    with pytest.raises(ConfigurationError):
        ideal_member(ring.var("x", PREC), pres, cutoff=PREC - 1)


def test_multiplication_kernel_matches_ideal(ring, pres):
    u = ring.var("x", PREC)
    computed = multiplication_kernel(u, pres, 2, 4)
    _, ideal = ideal_rows(pres, 2, 4)
    assert compare_kernel("x-kernel", computed, [], ideal, 2).status == PASS
    # x itself is not killed by x
    assert compare_kernel("x-kernel", computed, [{0: 1}], ideal, 2).status == FAIL
