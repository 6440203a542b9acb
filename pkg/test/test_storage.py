import json
import logging

import pytest

from bpbv_engine.errors import ConfigurationError
from bpbv_engine.models import FAIL, PASS, CheckRecord, Report
from bpbv_engine.storage import LawCacheStorage, ReportArchive, StorageManager, header_digest, law_header
from bpbv_engine.storage_config import (
    LawCacheConfig,
    ReportArchiveConfig,
    StorageConfig,
    load_storage_config,
)


@pytest.fixture
def cache(tmp_path):
    return LawCacheStorage(LawCacheConfig(directory=str(tmp_path / "laws")))


def test_header_matches_law(law_for):
    law = law_for(2, 1)
    assert law_header(2, 1, "hazewinkel", law.D, law.N) == law.header()


def test_store_and_load(cache, law_for):
    law = law_for(2, 1)
    path = cache.store(law)
    assert path == cache.path_for(law.header())
    assert path.read_text(encoding="utf-8").endswith("\n")
    loaded = cache.load(law.header())
    assert loaded is not None
    assert loaded.header() == law.header()
    assert loaded.pseries == law.pseries
    assert loaded.F == law.F


def test_other_header_misses(cache, law_for):
    law = law_for(2, 1)
    cache.store(law)
    assert cache.load({**law.header(), "format_version": 2}) is None
    assert cache.load({**law.header(), "D": law.D + 1}) is None


def _rewrite(path, mutate):
    record = json.loads(path.read_text(encoding="utf-8"))
    mutate(record)
    path.write_text(json.dumps(record), encoding="utf-8")


def test_stale_version_is_ignored(cache, law_for, caplog):
    law = law_for(2, 1)
    path = cache.store(law)
    _rewrite(path, lambda record: record["header"].update(format_version=0))
    with caplog.at_level(logging.WARNING):
        assert cache.load(law.header()) is None
    assert "stale" in caplog.text


def test_hash_mismatch_is_ignored(cache, law_for, caplog):
    law = law_for(2, 1)
    path = cache.store(law)
    _rewrite(path, lambda record: record.update(header_sha256="0" * 64))
    with caplog.at_level(logging.WARNING):
        assert cache.load(law.header()) is None
    assert "hash mismatch" in caplog.text


def test_truncated_file_is_ignored(cache, law_for, caplog):
    law = law_for(2, 1)
    path = cache.store(law)
    text = path.read_text(encoding="utf-8")
    path.write_text(text[: len(text) // 2], encoding="utf-8")
    with caplog.at_level(logging.WARNING):
        assert cache.load(law.header()) is None
    assert "unreadable" in caplog.text


def test_manager_builds_once(tmp_path):
    directory = tmp_path / "laws"
    config = StorageConfig(law_cache=LawCacheConfig(directory=str(directory)))
    manager = StorageManager()
    first = manager.load_law(config, 2, 1, "araki", 6, 6)
    files = sorted(directory.glob("*.json"))
    assert [f.name for f in files] == [f"{header_digest(first.header())}.json"]
    second = StorageManager().load_law(config, 2, 1, "araki", 6, 6)
    assert second.pseries == first.pseries
    assert sorted(directory.glob("*.json")) == files


def test_manager_without_cache(tmp_path):
    directory = tmp_path / "laws"
    config = StorageConfig(law_cache=LawCacheConfig(enable=False, directory=str(directory)))
    StorageManager().load_law(config, 2, 1, "hazewinkel", 6, 6)
    assert not directory.exists()


def test_report_archive_roundtrip(tmp_path):
    config = ReportArchiveConfig(enable=True, url=f"sqlite:///{tmp_path / 'reports.db'}")
    archive = ReportArchive(config)
    params = {"command": "dickson", "p": 2, "k": 2}
    archive.save(Report(params=params, checks=[CheckRecord("beta=beta'", PASS)]))
    archive.save(Report(params=params, checks=[CheckRecord("beta=beta'", FAIL, detail="x0")]))
    assert archive.load_statuses(params) == [PASS, FAIL]
    assert archive.load_statuses({**params, "k": 3}) == []


def test_archive_requires_url():
    with pytest.raises(ConfigurationError):
        ReportArchive(ReportArchiveConfig(enable=True))


def test_unavailable_archive_only_warns(caplog):
    config = StorageConfig(report_archive=ReportArchiveConfig(enable=True))
    with caplog.at_level(logging.WARNING):
        StorageManager().archive_report(config, Report(params={"command": "alpha"}))
    assert "Report archive unavailable" in caplog.text


def test_load_storage_config(monkeypatch, tmp_path):
    monkeypatch.setenv("LAW_CACHE_DIR", str(tmp_path / "from-env"))
    monkeypatch.delenv("LAW_CACHE_ENABLE", raising=False)
    monkeypatch.delenv("REPORT_DB_URL", raising=False)
    monkeypatch.delenv("REPORT_DB_ENABLE", raising=False)
    config = load_storage_config()
    assert config.law_cache.directory == str(tmp_path / "from-env")
    assert config.law_cache.enable
    assert not config.report_archive.enable

    config = load_storage_config(
        {"law_cache": {"directory": str(tmp_path / "flag")}, "report_archive": {"url": "sqlite://"}}
    )
    assert config.law_cache.directory == str(tmp_path / "flag")
    assert config.report_archive.enable
    assert config.report_archive.url == "sqlite://"

    monkeypatch.setenv("LAW_CACHE_ENABLE", "off")
    assert not load_storage_config().law_cache.enable
