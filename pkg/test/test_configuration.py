import pytest

from bpbv_engine.configuration import RunConfig
from bpbv_engine.errors import ConfigurationError


def test_defaults():
    config = RunConfig()
    assert (config.p, config.m, config.n, config.w) == (2, 1, 1, 1)
    assert config.command == "verify-main"
    assert config.effective_k == 1
    assert config.effective_D == 6
    assert config.effective_N == 6


def test_params_echo():
    params = RunConfig.from_flat({"prime": 3, "n": 2}).params()
    assert params == {
        "command": "verify-main",
        "p": 3,
        "m": 1,
        "n": 2,
        "k": 2,
        "w": 2,
        "flavor": "hazewinkel",
        "D": 23,
        "N": 6,
        "degrees": list(range(-24, 23, 2)),
    }


@pytest.mark.parametrize(
    "values, message",
    [
        ({"prime": 4}, "not prime"),
        ({"n": 0}, "n must be >= 1"),
        ({"m": 2}, "0 <= m <= n"),
        ({"k": 2}, "exceeds w"),
        ({"flavor": "lubin-tate"}, "unknown flavor"),
        ({"trunc_deg": 0}, "trunc_deg"),
        ({"log_level": "loud"}, "unknown log level"),
    ],
)
def test_invalid_parameters(values, message):
    with pytest.raises(ConfigurationError, match=message):
        RunConfig.from_flat(values)


def test_unknown_key_rejected():
    with pytest.raises(ConfigurationError, match="unknown configuration key"):
        RunConfig.from_flat({"primes": 3})


def test_dickson_allows_any_rank():
    config = RunConfig.from_flat({"command": "dickson", "k": 3})
    assert config.effective_k == 3


def test_degrees_and_log_level_are_normalised():
    config = RunConfig.from_flat({"degrees": "0, 2;4", "log_level": "debug"})
    assert config.slices.degrees == [0, 2, 4]
    assert config.effective_degrees == [0, 2, 4]
    assert config.log_level == "DEBUG"


def test_filtration_truncation():
    assert RunConfig.from_flat({"command": "filtration"}).effective_D == 8
    assert RunConfig.from_flat({"command": "filtration", "trunc_deg": 9}).effective_D == 9
    assert RunConfig.from_flat({"command": "filtration", "filtration_trunc": 10}).effective_D == 10
    assert RunConfig.from_flat({"trunc_deg": 9}).effective_D == 9


def test_sources_precedence(tmp_path):
    config_file = tmp_path / "run.env"
    config_file.write_text("PRIME=3\nBPBV_N=2\nFLAVOR=araki\n", encoding="utf-8")
    environ = {"BPBV_N": "3", "BPBV_DEGREES": "2,4", "UNRELATED": "1"}
    config = RunConfig.from_sources({"m": 2, "seed": None}, str(config_file), environ)
    assert config.p == 3
    assert config.n == 3
    assert config.m == 2
    assert config.law.flavor == "araki"
    assert config.slices.degrees == [2, 4]
    assert config.seed == 0

    overridden = RunConfig.from_sources({"n": 4}, str(config_file), environ)
    assert overridden.n == 4


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigurationError, match="does not exist"):
        RunConfig.from_sources({}, str(tmp_path / "absent.env"), {})


def test_default_degrees_are_symmetric_up_to_the_truncation():
    config = RunConfig.from_flat({"command": "filtration", "n": 2})
    assert config.effective_D == 12
    assert config.effective_degrees == list(range(-24, 13, 2))
    assert RunConfig.from_flat({"command": "filtration"}).effective_degrees[-1] == 8
