"""Propagate the control center into generated repository files."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath
from typing import Callable

from .. import GENERATED_HEADER
from ..errors import SyncError
from .tree import ConfigTree

log = logging.getLogger(__name__)

SKIP_DIRS = {".git", ".control", "__pycache__"}
_HTML_SUFFIXES = {".md", ".markdown", ".html", ".htm", ".xml"}


@dataclass(frozen=True)
class FileGenerator:
    name: str
    generate: Callable[[ConfigTree], list[tuple[str, str]]]


@dataclass
class SyncReport:
    created: list[str] = field(default_factory=list)
    updated: list[str] = field(default_factory=list)
    unchanged: list[str] = field(default_factory=list)
    deleted: list[str] = field(default_factory=list)

    @property
    def changed(self) -> bool:
        return bool(self.created or self.updated or self.deleted)

    def to_dict(self) -> dict:
        return {
            "created": self.created,
            "updated": self.updated,
            "unchanged": self.unchanged,
            "deleted-orphan": self.deleted,
        }


def header_line(path: str) -> str:
    if PurePosixPath(path).suffix.lower() in _HTML_SUFFIXES:
        return f"<!-- {GENERATED_HEADER} -->"
    return f"# {GENERATED_HEADER}"


def with_header(path: str, content: str) -> str:
    if not content.endswith("\n"):
        content += "\n"
    return f"{header_line(path)}\n{content}"


def is_generated(path: Path) -> bool:
    try:
        with path.open("r", encoding="utf-8", errors="replace") as fh:
            first = fh.readline()
    except OSError:
        return False
    return GENERATED_HEADER in first


def _normalize(path: str, generator: str) -> str:
    p = PurePosixPath(path.replace("\\", "/"))
    if p.is_absolute() or ".." in p.parts or not p.parts:
        raise SyncError(f"generator {generator!r} emitted invalid path {path!r}")
    return p.as_posix()


def render_outputs(tree: ConfigTree, generators: list[FileGenerator]) -> dict[str, str]:
    """Run every generator and return path -> final file content."""
    owner: dict[str, str] = {}
    outputs: dict[str, str] = {}
    for gen in generators:
        for raw_path, content in gen.generate(tree):
            path = _normalize(raw_path, gen.name)
            if path in owner:
                raise SyncError(f"generators {owner[path]!r} and {gen.name!r} both claim {path}")
            owner[path] = gen.name
            outputs[path] = with_header(path, content)
    return outputs


def synchronize(tree: ConfigTree, generators: list[FileGenerator], workspace: str | Path) -> SyncReport:
    workspace = Path(workspace)
    outputs = render_outputs(tree, generators)
    try:
        workspace.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise SyncError(f"workspace {workspace} is not writable: {exc}") from exc
    if not workspace.is_dir() or not os.access(workspace, os.W_OK | os.X_OK):
        raise SyncError(f"workspace {workspace} is not writable")

    report = SyncReport()
    for path in sorted(outputs):
        target = workspace / path
        data = outputs[path].encode("utf-8")
        if target.exists():
            if target.read_bytes() == data:
                report.unchanged.append(path)
                continue
            bucket = report.updated
        else:
            bucket = report.created
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(data)
        except OSError as exc:
            raise SyncError(f"cannot write {target}: {exc}") from exc
        bucket.append(path)

    for dirpath, dirnames, filenames in os.walk(workspace):
        dirnames[:] = sorted(d for d in dirnames if d not in SKIP_DIRS)
        for name in sorted(filenames):
            full = Path(dirpath) / name
            rel = full.relative_to(workspace).as_posix()
            if rel not in outputs and is_generated(full):
                full.unlink()
                report.deleted.append(rel)
    report.deleted.sort()
    log.info("sync: %d created, %d updated, %d unchanged, %d deleted",
             len(report.created), len(report.updated), len(report.unchanged), len(report.deleted))
    return report
