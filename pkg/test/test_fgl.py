import pytest

from bpbv_engine.errors import ConfigurationError
from bpbv_engine.fgl import (
    CACHE_FORMAT_VERSION,
    FormalGroupLaw,
    build_fgl,
    check_axioms,
    check_flavor_identity,
    compare_flavors_mod_p,
    default_truncation,
    formal_diff,
    formal_sum,
    int_series,
    log_coefficients,
    pi_congruence_check,
    pi_decompose,
)

LAWS = [(2, 1, "hazewinkel"), (2, 1, "araki"), (3, 1, "hazewinkel"), (3, 1, "araki"), (2, 2, "hazewinkel")]


def test_default_truncation():
    assert default_truncation(2, 1, 1) == 6
    assert default_truncation(2, 1, 2) == 12
    assert default_truncation(3, 0, 1) == 9


def test_log_coefficients():
    assert log_coefficients(2, 1, "hazewinkel", 2)[1].render() == "1/2*v1"
    assert log_coefficients(2, 1, "araki", 2)[1].render() == "-1/2*v1"
    with pytest.raises(ConfigurationError):
        log_coefficients(2, 1, "lubin-tate", 2)


@pytest.mark.parametrize("p, n, flavor", LAWS)
def test_axioms(law_for, p, n, flavor):
    law = law_for(p, n, flavor)
    failures = [check for check in check_axioms(law) if not check.holds]
    assert failures == []


@pytest.mark.parametrize("p, n, flavor", LAWS)
def test_flavor_identity(law_for, p, n, flavor):
    check = check_flavor_identity(law_for(p, n, flavor))
    assert check.holds, check.detail


@pytest.mark.parametrize("p, n, flavor", LAWS)
def test_pi_decomposition(law_for, p, n, flavor):
    law = law_for(p, n, flavor)
    pis = pi_decompose(law.pseries)
    assert len(pis) == n + 1
    ring = law.pseries.ring
    total = pis[0].scale(p)
    for k in range(1, n + 1):
        total = total + pis[k].mul(ring.v(k, law.D))
    assert total == law.pseries
    for k, pi in enumerate(pis):
        check = pi_congruence_check(pi, k)
        assert check.holds, check.detail


def test_araki_p_series_mod_p(law_for):
    law = law_for(2, 1, "araki")
    assert law.p_series(1).render() == "v1*t^2"


@pytest.mark.parametrize("p, n, flavor", LAWS[:3])
def test_combination_matches_iterated_sum(law_for, p, n, flavor):
    law = law_for(p, n, flavor)
    ring = law.e_ring(0, ("t",))
    assert int_series(law, 3) == law.combination({"t": 3}, ring)
    assert int_series(law, -1) == law.inverse
    assert int_series(law, p) == law.pseries


def test_formal_sum_and_difference(law_for):
    law = law_for(2, 1, "hazewinkel")
    ring = law.e_ring(0, ("s", "t"))
    s, t = ring.var("s", law.D), ring.var("t", law.D)
    assert formal_sum(law, [s, t]) == law.combination({"s": 1, "t": 1}, ring)
    assert formal_diff(law, t, t).is_zero()


def test_cap_beyond_truncation_rejected(law_for):
    law = law_for(2, 1, "hazewinkel")
    with pytest.raises(ConfigurationError):
        law.combination({"t": 2}, law.e_ring(0, ("t",)), law.D + 1)


@pytest.mark.parametrize("p, n, D", [(4, 1, 10), (2, 0, 10), (2, 2, 3)])
def test_build_rejects_bad_parameters(p, n, D):
    with pytest.raises(ConfigurationError):
        build_fgl(p, n, "hazewinkel", D)


def test_header_and_payload(law_for):
    law = law_for(2, 1, "araki")
    assert law.header() == {"format_version": CACHE_FORMAT_VERSION, "p": 2, "n": 1, "flavor": "araki", "D": 6, "N": 6}
    restored = FormalGroupLaw.from_payload(law.to_payload())
    assert restored.header() == law.header()
    assert restored.pseries == law.pseries
    assert restored.F == law.F


def test_flavor_comparison_is_reported():
    comparison = compare_flavors_mod_p(2, 1, 6)
    assert comparison.agree == (not comparison.differences)
