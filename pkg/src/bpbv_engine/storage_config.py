"""
Storage configuration for the law cache and the report archive.
"""

from __future__ import annotations

import os
from typing import Any, Mapping, Optional

from pydantic import BaseModel


class LawCacheConfig(BaseModel):
    enable: bool = True
    directory: str = os.path.expanduser("~/.bpbv_engine/cache")


class ReportArchiveConfig(BaseModel):
    enable: bool = False
    url: Optional[str] = None
    table_name: str = "bpbv_reports"


class StorageConfig(BaseModel):
    law_cache: LawCacheConfig = LawCacheConfig()
    report_archive: ReportArchiveConfig = ReportArchiveConfig()


def _env_bool(name: str, default: bool) -> bool:
    raw = os.getenv(name)
    if raw is None:
        return default
    return raw.lower() in {"1", "true", "yes", "on"}


def load_storage_config(overrides: Optional[Mapping[str, Any]] = None) -> StorageConfig:
    """
    Explicit directory and URL overrides (the CLI flags) win over the
    environment; the enable switches follow LAW_CACHE_ENABLE and REPORT_DB_ENABLE.

    ``overrides`` has the shape ``{"law_cache": {...}, "report_archive": {...}}``;
    the CLI maps ``--cache-dir`` and ``--archive-url`` onto it.
    """
    cfg = StorageConfig()
    overrides = overrides or {}

    cache_cfg = overrides.get("law_cache", {})
    cfg.law_cache = LawCacheConfig(
        enable=_env_bool("LAW_CACHE_ENABLE", cache_cfg.get("enable", cfg.law_cache.enable)),
        directory=cache_cfg.get("directory") or os.getenv("LAW_CACHE_DIR", cfg.law_cache.directory),
    )

    archive_cfg = overrides.get("report_archive", {})
    url = archive_cfg.get("url") or os.getenv("REPORT_DB_URL", cfg.report_archive.url)
    cfg.report_archive = ReportArchiveConfig(
        enable=_env_bool("REPORT_DB_ENABLE", archive_cfg.get("enable", bool(archive_cfg.get("url")))),
        url=url,
        table_name=archive_cfg.get("table_name", cfg.report_archive.table_name),
    )

    return cfg
