import json

import pytest

from bpbv_engine.cli import EXIT_BAD_CONFIG, EXIT_CHECK_FAILED, EXIT_OK, main


@pytest.fixture(autouse=True)
def isolated_environment(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    for name in ("REPORT_DB_URL", "REPORT_DB_ENABLE", "LAW_CACHE_ENABLE", "LAW_CACHE_DIR"):
        monkeypatch.delenv(name, raising=False)
    for name in ("PRIME", "M", "N", "K", "FLAVOR", "DEGREES"):
        monkeypatch.delenv(f"BPBV_{name}", raising=False)


def _run(tmp_path, *argv, name="report.json"):
    out = tmp_path / name
    code = main([*argv, "--cache-dir", str(tmp_path / "cache"), "--no-timing", "--out", str(out)])
    document = json.loads(out.read_text(encoding="utf-8")) if out.exists() else None
    return code, document, out


def test_dickson(tmp_path):
    code, report, _ = _run(tmp_path, "dickson", "--prime", "2", "--m", "0", "--n", "1", "--k", "2")
    assert code == EXIT_OK
    assert report["status"] == "PASS"
    assert report["outputs"]["beta"] == "x0*x1^2 + x0^2*x1"
    assert report["outputs"]["beta_sec"] == report["outputs"]["beta"]
    assert report["params"]["k"] == 2


def test_rank_beyond_w_is_a_config_error(tmp_path, capsys):
    code, report, _ = _run(tmp_path, "verify-main", "--prime", "2", "--m", "1", "--n", "1", "--k", "2")
    assert code == EXIT_BAD_CONFIG
    assert report is None
    assert "exceeds w" in capsys.readouterr().err


def test_composite_prime_is_a_config_error(tmp_path):
    code, _, _ = _run(tmp_path, "alpha", "--prime", "6")
    assert code == EXIT_BAD_CONFIG


def test_pseries_araki(tmp_path):
    code, report, _ = _run(tmp_path, "pseries", "--prime", "2", "--n", "1", "--flavor", "araki")
    assert code == EXIT_OK
    assert report["outputs"]["pseries"] == "v1*t^2"
    assert report["params"]["D"] == 6


def test_alpha(tmp_path):
    code, report, _ = _run(tmp_path, "alpha", "--prime", "2", "--m", "1", "--n", "1")
    assert code == EXIT_OK
    assert report["outputs"]["alpha"] == "x0^2"
    assert report["outputs"]["degree"] == 4


def test_verify_main_is_reproducible(tmp_path):
    argv = ("verify-main", "--prime", "2", "--m", "1", "--n", "1")
    code, report, first = _run(tmp_path, *argv, name="first.json")
    assert code == EXIT_OK
    assert report["status"] == "PASS"
    names = [check["name"] for check in report["checks"]]
    assert "alpha - alpha' in ([p](x_j))" in names
    assert all(check["timing_ms"] == 0 for check in report["checks"])
    # second run reads the law from the cache
    _, _, second = _run(tmp_path, *argv, name="second.json")
    assert first.read_bytes() == second.read_bytes()


def test_recheck_report(tmp_path):
    _, report, source = _run(tmp_path, "verify-main", "--prime", "2", "--m", "1", "--n", "1")
    certified = [check for check in report["checks"] if check["certificate"]]
    code, recheck, _ = _run(tmp_path, "recheck", str(source), name="recheck.json")
    assert code == EXIT_OK
    assert recheck["outputs"]["certificates"] == len(certified) == 2
    assert recheck["params"] == {"command": "recheck", "file": source.name}


def test_recheck_detects_tampering(tmp_path):
    _, report, source = _run(tmp_path, "verify-main", "--prime", "2", "--m", "1", "--n", "1")
    certificate = next(check["certificate"] for check in report["checks"] if check["certificate"])
    certificate["target"] = certificate["generators"][0]
    certificate["multipliers"] = [
        {**multiplier, "terms": []} for multiplier in certificate["multipliers"]
    ]
    tampered = tmp_path / "tampered.json"
    tampered.write_text(json.dumps(certificate), encoding="utf-8")
    code, recheck, _ = _run(tmp_path, "recheck", str(tampered), name="recheck.json")
    assert code == EXIT_CHECK_FAILED
    assert recheck["status"] == "FAIL"


def test_recheck_missing_file(tmp_path):
    code, _, _ = _run(tmp_path, "recheck", str(tmp_path / "absent.json"))
    assert code == EXIT_BAD_CONFIG


@pytest.mark.slow
def test_filtration_over_the_default_degrees(tmp_path):
    code, report, _ = _run(tmp_path, "filtration", "--prime", "2", "--m", "1", "--n", "2")
    assert report["params"]["D"] == 12
    assert report["params"]["degrees"] == list(range(-24, 13, 2))
    not_passed = [check["name"] for check in report["checks"] if check["status"] != "PASS"]
    assert not_passed == []
    assert code == EXIT_OK
    assert report["status"] == "PASS"
    names = {check["name"] for check in report["checks"]}
    assert "ann(chi_2) in degree -24" in names
    assert "v_1-torsion of E*BV_2 in degree 12" in names
