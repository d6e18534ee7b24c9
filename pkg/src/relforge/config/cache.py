"""Content-addressed cache for inherited documents.

Layout: ``<dir>/<sha256(key)>.json`` holding ``{key, fetched_at, retention, payload}``.
One writer at a time; readers may run concurrently.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

log = logging.getLogger(__name__)

DEFAULT_RETENTION = 86400


def cache_key(source: str, path: str = "") -> str:
    """Canonical key for a source URI plus the path extracted from it."""
    return f"{source.strip()}#{path.strip()}"


@dataclass(frozen=True)
class CacheEntry:
    key: str
    payload: str
    fetched_at: float
    retention: float = DEFAULT_RETENTION

    def is_stale(self, now: float) -> bool:
        return now - self.fetched_at > self.retention


@dataclass(frozen=True)
class CacheResult:
    status: Literal["hit", "stale", "miss"]
    payload: str | None = None


class CacheStore:
    def __init__(self, directory: str | Path, default_retention: float = DEFAULT_RETENTION):
        self.directory = Path(directory)
        self.default_retention = default_retention

    def _file(self, key: str) -> Path:
        return self.directory / f"{hashlib.sha256(key.encode('utf-8')).hexdigest()}.json"

    def read(self, key: str) -> CacheEntry | None:
        path = self._file(key)
        if not path.exists():
            return None
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
            entry = CacheEntry(
                key=raw["key"],
                payload=raw["payload"],
                fetched_at=float(raw["fetched_at"]),
                retention=float(raw["retention"]),
            )
            if not isinstance(entry.payload, str):
                raise TypeError("payload must be a string")
        except (OSError, ValueError, KeyError, TypeError) as exc:
            log.warning("ignoring corrupt cache entry %s: %s", path.name, exc)
            return None
        if entry.key != key:
            log.warning("ignoring cache entry %s: key mismatch", path.name)
            return None
        return entry

    def write(self, key: str, payload: str, now: float, retention: float | None = None) -> CacheEntry:
        entry = CacheEntry(key, payload, now, self.default_retention if retention is None else retention)
        self.directory.mkdir(parents=True, exist_ok=True)
        body = json.dumps(
            {"key": entry.key, "fetched_at": entry.fetched_at, "retention": entry.retention, "payload": entry.payload},
            indent=2,
            sort_keys=True,
        )
        # atomic replace so concurrent readers never see a half-written file
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(body)
        os.replace(tmp, self._file(key))
        return entry


def cache_lookup(store: CacheStore, key: str, now: float) -> CacheResult:
    entry = store.read(key)
    if entry is None:
        return CacheResult("miss")
    if entry.is_stale(now):
        return CacheResult("stale", entry.payload)
    return CacheResult("hit", entry.payload)
