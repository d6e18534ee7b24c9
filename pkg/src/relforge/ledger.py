"""Machine-readable changelog, release notes and commit-driven task progress."""

from __future__ import annotations

import bisect
import json
import logging
import re
import string
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import jsonschema

from .config.tree import ConfigTree
from .errors import LedgerError, VersionError
from .issues import ProtocolDoc, Ticket
from .version import ChangeType, PublicVersion, format_version, parse_version

log = logging.getLogger(__name__)

CHANGELOG_FILE = "changelog.json"
TASK_TRAILER = re.compile(r"^Task:\s*([0-9]+)\s*$", re.M)


def parse_date(text: str) -> datetime:
    """ISO-8601 date or datetime; naive values are taken as UTC."""
    try:
        value = datetime.fromisoformat(text[:-1] + "+00:00" if text.endswith("Z") else text)
    except (TypeError, ValueError):
        raise LedgerError(f"date {text!r} is not ISO-8601") from None
    return value if value.tzinfo else value.replace(tzinfo=timezone.utc)


@dataclass(frozen=True)
class ChangelogEntry:
    id: str
    issue: int
    pr: int
    type: str
    title: str
    description: str
    contributors: tuple[str, ...]
    version: PublicVersion
    commit: str
    date: str
    doi: str | None = None

    def __post_init__(self):
        if not self.commit:
            raise LedgerError("changelog entry needs a commit id")
        parse_date(self.date)

    @property
    def sort_key(self) -> tuple[datetime, str]:
        return parse_date(self.date), self.id

    @property
    def identity(self) -> tuple[PublicVersion, str]:
        return self.version, self.commit

    def identifiers(self) -> str:
        parts = [f"Version: {format_version(self.version)}", f"Commit: {self.commit}", f"Date: {self.date}"]
        if self.doi:
            parts.append(f"DOI: {self.doi}")
        return "; ".join(parts)

    def to_dict(self) -> dict:
        doc: dict[str, Any] = {
            "id": self.id,
            "issue": self.issue,
            "pr": self.pr,
            "type": self.type,
            "title": self.title,
            "description": self.description,
            "contributors": list(self.contributors),
            "version": format_version(self.version),
            "commit": self.commit,
            "date": self.date,
        }
        if self.doi is not None:
            doc["doi"] = self.doi
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "ChangelogEntry":
        try:
            version = parse_version(doc["version"])
        except VersionError as exc:
            raise LedgerError(f"entry {doc.get('id')!r}: {exc}") from None
        return cls(
            id=doc["id"],
            issue=doc["issue"],
            pr=doc["pr"],
            type=doc["type"],
            title=doc["title"],
            description=doc.get("description", ""),
            contributors=tuple(doc.get("contributors", ())),
            version=version,
            commit=doc["commit"],
            date=doc["date"],
            doi=doc.get("doi"),
        )


def changelog_schema() -> dict:
    return json.loads((resources.files("relforge") / "data" / "changelog.schema.json").read_text(encoding="utf-8"))


@dataclass(frozen=True)
class Ledger:
    entries: tuple[ChangelogEntry, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def for_version(self, v: PublicVersion) -> list[ChangelogEntry]:
        return [e for e in self.entries if e.version == v]

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "Ledger":
        try:
            jsonschema.validate(doc, changelog_schema())
        except jsonschema.ValidationError as exc:
            where = "/".join(map(str, exc.absolute_path)) or "<root>"
            raise LedgerError(f"invalid changelog at {where}: {exc.message}") from None
        ledger = cls()
        for item in doc["entries"]:
            ledger = append_entry(ledger, ChangelogEntry.from_dict(item))
        return ledger

    @classmethod
    def load(cls, path: str | Path) -> "Ledger":
        path = Path(path)
        if not path.exists():
            return cls()
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise LedgerError(f"{path}: {exc}") from None
        return cls.from_dict(doc)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")


def derive_entry(
    ticket: Ticket,
    pr: Mapping[str, Any],
    commits: Sequence[Mapping[str, Any]],
    version: PublicVersion | None,
    ids: Mapping[str, Any],
    change_types: Mapping[str, str] | None = None,
) -> ChangelogEntry:
    """Build an entry from a ticket, its pull request and the merged commits.

    ``pr`` carries ``number`` plus optional ``participants`` and ``body``;
    each commit carries an ``author``; ``ids`` carries ``commit``, ``date``
    and optionally ``doi``.
    """
    if version is None:
        raise LedgerError("changelog entry needs a version")
    commit = ids.get("commit")
    if not commit:
        raise LedgerError("changelog entry needs a commit id")
    if "number" not in pr:
        raise LedgerError("pull request number is unknown")
    people = {c["author"] for c in commits if c.get("author")}
    people.update(p for p in pr.get("participants", ()) if p)
    return ChangelogEntry(
        id=f"{format_version(version)}-{str(commit)[:12]}",
        issue=ticket.number,
        pr=int(pr["number"]),
        type=ChangeType.of(ticket.type_id, change_types).value,
        title=ticket.title,
        description=pr.get("body") or str(ticket.inputs.get("description", "")),
        contributors=tuple(sorted(people)),
        version=version,
        commit=str(commit),
        date=str(ids["date"]),
        doi=ids.get("doi"),
    )


def append_entry(ledger: Ledger, entry: ChangelogEntry) -> Ledger:
    if any(e.identity == entry.identity for e in ledger.entries):
        raise LedgerError(
            f"duplicate changelog entry for version {format_version(entry.version)} and commit {entry.commit}"
        )
    keys = [e.sort_key for e in ledger.entries]
    at = bisect.bisect_right(keys, entry.sort_key)
    return Ledger(ledger.entries[:at] + (entry,) + ledger.entries[at:])


# -- release notes ------------------------------------------------------------

HEADER_FIELDS = frozenset({"name", "version", "date"})
SECTION_FIELDS = frozenset({"group", "group_title"})
ENTRY_FIELDS = frozenset(
    {"id", "issue", "pr", "type", "title", "description", "contributors", "version", "commit", "date", "doi",
     "identifiers"}
)


def _markers(text: str) -> list[str]:
    try:
        return [name for _, name, _, _ in string.Formatter().parse(text) if name is not None]
    except ValueError as exc:
        raise LedgerError(f"malformed template {text!r}: {exc}") from None


@dataclass(frozen=True)
class NotesTemplate:
    header: str = "# {name} {version}\n\nReleased on {date}.\n"
    section: str = "\n## {group_title}\n\n"
    entry: str = "- {title} (#{issue}, PR #{pr})\n  - {identifiers}\n"
    groups: tuple[str, ...] = ("major", "minor", "patch")
    group_titles: Mapping[str, str] = field(default_factory=lambda: {
        "major": "Breaking changes", "minor": "New features", "patch": "Fixes",
    })

    def __post_init__(self):
        for part, allowed in ((self.header, HEADER_FIELDS), (self.section, SECTION_FIELDS),
                              (self.entry, ENTRY_FIELDS)):
            for name in _markers(part):
                if name not in allowed:
                    raise LedgerError(f"unresolved template marker {{{name}}}")

    @classmethod
    def from_tree(cls, tree: ConfigTree) -> "NotesTemplate":
        cfg = tree.get("docs.release_notes", {}) or {}
        base = cls()
        return cls(
            header=cfg.get("header", base.header),
            section=cfg.get("section", base.section),
            entry=cfg.get("entry", base.entry),
            groups=tuple(cfg.get("groups", base.groups)),
            group_titles=dict(cfg.get("group_titles", base.group_titles)),
        )


def render_release_notes(entries: Iterable[ChangelogEntry], template: NotesTemplate, name: str = "") -> str:
    entries = list(entries)
    if not entries:
        raise LedgerError("cannot render release notes for an empty ledger slice")
    latest = max(entries, key=lambda e: e.sort_key)
    version = max(e.version for e in entries)
    out = [template.header.format(name=name, version=format_version(version), date=latest.date)]
    order = list(template.groups) + sorted({e.type for e in entries} - set(template.groups))
    for group in order:
        members = [e for e in entries if e.type == group]
        if not members:
            continue
        out.append(template.section.format(group=group, group_title=template.group_titles.get(group, group)))
        for e in members:
            values = e.to_dict()
            values["contributors"] = ", ".join(e.contributors)
            values["doi"] = e.doi or ""
            values["identifiers"] = e.identifiers()
            out.append(template.entry.format(**values))
    return "".join(out)


# -- progress -------------------------------------------------------------------


def mark_progress(protocol: ProtocolDoc, message: str) -> ProtocolDoc:
    """Set the done flag of every task named by a ``Task: <k>`` trailer."""
    for match in TASK_TRAILER.finditer(message):
        index = int(match.group(1))
        if not 1 <= index <= len(protocol.tasks):
            log.warning("commit references task %d but the protocol has %d tasks", index, len(protocol.tasks))
            continue
        protocol = protocol.mark_done(index)
    return protocol
