from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from sqlalchemy import JSON as SAJSON
from sqlalchemy import Column, DateTime, Integer, MetaData, String, Table, create_engine, func, select
from sqlalchemy.dialects.postgresql import JSONB
from sqlalchemy.exc import SQLAlchemyError

from .errors import BpbvError, ConfigurationError
from .fgl import CACHE_FORMAT_VERSION, FormalGroupLaw, build_fgl
from .models import Report
from .storage_config import LawCacheConfig, ReportArchiveConfig, StorageConfig

logger = logging.getLogger(__name__)


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def law_header(p: int, n: int, flavor: str, D: int, N: int) -> Dict[str, object]:
    """Identity of a law; must equal ``FormalGroupLaw.header()`` for the same parameters."""
    return {"format_version": CACHE_FORMAT_VERSION, "p": p, "n": n, "flavor": flavor, "D": D, "N": N}


def header_digest(header: Mapping[str, object]) -> str:
    return hashlib.sha256(canonical_json(dict(header)).encode("utf-8")).hexdigest()


class LawCacheStorage:
    """
    One JSON file per law, named by the SHA-256 of its canonical header.

    Files are written to a temporary name in the same directory and moved into
    place with os.replace, so a reader sees either nothing or a whole file.
    """

    def __init__(self, config: LawCacheConfig):
        self.config = config
        self.base_dir = Path(config.directory).expanduser()
        self.writable = True
        try:
            self.base_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            logger.warning("Law cache directory %s unavailable: %s", self.base_dir, exc)
            self.writable = False

    def path_for(self, header: Mapping[str, object]) -> Path:
        return self.base_dir / f"{header_digest(header)}.json"

    def store(self, law: FormalGroupLaw) -> Optional[Path]:
        header = law.header()
        digest = header_digest(header)
        record = {"header": header, "header_sha256": digest, "law": law.to_payload()}
        target = self.path_for(header)
        try:
            fd, tmp_name = tempfile.mkstemp(prefix=".tmp-", suffix=".json", dir=self.base_dir)
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(canonical_json(record) + "\n")
            os.replace(tmp_name, target)
        except OSError as exc:
            logger.warning("Failed to write law cache file %s: %s", target, exc)
            return None
        logger.debug("cached %r at %s", law, target)
        return target

    def load(self, header: Mapping[str, object]) -> Optional[FormalGroupLaw]:
        path = self.path_for(header)
        if not path.exists():
            return None
        try:
            record = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
            logger.warning("Ignoring unreadable law cache file %s: %s", path, exc)
            return None
        if not isinstance(record, dict):
            logger.warning("Ignoring malformed law cache file %s", path)
            return None
        stored_header = record.get("header")
        if not isinstance(stored_header, dict) or stored_header.get("format_version") != CACHE_FORMAT_VERSION:
            logger.warning("Ignoring stale law cache file %s", path)
            return None
        if stored_header != dict(header) or record.get("header_sha256") != header_digest(stored_header):
            logger.warning("Ignoring law cache file %s: header hash mismatch", path)
            return None
        try:
            law = FormalGroupLaw.from_payload(record["law"])
        except (KeyError, TypeError, ValueError, BpbvError) as exc:
            logger.warning("Ignoring corrupt law cache file %s: %s", path, exc)
            return None
        if law.header() != dict(header):
            logger.warning("Ignoring law cache file %s: payload does not match its header", path)
            return None
        return law


class ReportArchive:
    def __init__(self, config: ReportArchiveConfig):
        if not config.url:
            raise ConfigurationError("Database URL is required when the report archive is enabled.")
        self.engine = create_engine(config.url, future=True)
        self.metadata = MetaData()
        json_type = SAJSON().with_variant(JSONB, "postgresql")
        self.table = Table(
            config.table_name,
            self.metadata,
            Column("id", Integer, primary_key=True, autoincrement=True),
            Column("params_sha256", String(64), index=True, nullable=False),
            Column("command", String(32), nullable=False),
            Column("status", String(32), nullable=False),
            Column("created_at", DateTime(timezone=True), server_default=func.now()),
            Column("report", json_type, nullable=False),
        )
        self.metadata.create_all(self.engine, checkfirst=True)

    def save(self, report: Report) -> None:
        params = dict(report.params)
        with self.engine.begin() as connection:
            connection.execute(
                self.table.insert().values(
                    params_sha256=header_digest(params),
                    command=str(params.get("command", "")),
                    status=report.overall_status,
                    created_at=datetime.now(timezone.utc),
                    report=report.as_dict(),
                )
            )

    def load_statuses(self, params: Mapping[str, Any]) -> list[str]:
        """Overall statuses of earlier runs with the same parameters, oldest first."""
        query = (
            select(self.table.c.status)
            .where(self.table.c.params_sha256 == header_digest(dict(params)))
            .order_by(self.table.c.id)
        )
        with self.engine.connect() as connection:
            return [row[0] for row in connection.execute(query)]


class StorageManager:
    def __init__(self):
        self._law_cache_instances: Dict[str, LawCacheStorage] = {}
        self._archive_instances: Dict[str, ReportArchive] = {}

    def load_law(self, storage_config: StorageConfig, p: int, n: int, flavor: str, D: int, N: int) -> FormalGroupLaw:
        """Cached law for (p, n, flavor, D, N), built and stored on a miss."""
        cache_cfg = storage_config.law_cache
        cache = self._get_law_cache(cache_cfg) if cache_cfg.enable else None
        header = law_header(p, n, flavor, D, N)
        if cache is not None:
            law = cache.load(header)
            if law is not None:
                logger.info("law cache hit for %s", header)
                return law
        law = build_fgl(p, n, flavor, D, N)
        if cache is not None and cache.writable:
            cache.store(law)
        return law

    def archive_report(self, storage_config: StorageConfig, report: Report) -> None:
        archive_cfg = storage_config.report_archive
        if not archive_cfg.enable:
            return
        try:
            store = self._get_report_archive(archive_cfg)
        except (SQLAlchemyError, ConfigurationError) as exc:
            logger.warning("Report archive unavailable: %s", exc)
            return
        self._safe_db_write(store, report)

    def _get_law_cache(self, config: LawCacheConfig) -> LawCacheStorage:
        key = str(Path(config.directory).expanduser().resolve())
        if key not in self._law_cache_instances:
            self._law_cache_instances[key] = LawCacheStorage(config)
        return self._law_cache_instances[key]

    def _get_report_archive(self, config: ReportArchiveConfig) -> ReportArchive:
        key = f"{config.url}:{config.table_name}"
        if key not in self._archive_instances:
            self._archive_instances[key] = ReportArchive(config)
        return self._archive_instances[key]

    @staticmethod
    def _safe_db_write(store: ReportArchive, report: Report) -> None:
        try:
            store.save(report)
        except SQLAlchemyError as exc:  # pragma: no cover
            logger.warning("Failed to persist report to database: %s", exc)
