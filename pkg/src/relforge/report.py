"""Validation findings shared by the config and license engines."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple


class Origin(NamedTuple):
    """Where a value came from: a file path (or URI) and a 1-based line."""

    file: str
    line: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}"


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning"
    path: str
    message: str
    origin: Origin | None = None

    def to_dict(self) -> dict:
        return {
            "severity": self.severity,
            "path": self.path,
            "message": self.message,
            "origin": None if self.origin is None else {"file": self.origin.file, "line": self.origin.line},
        }

    def __str__(self) -> str:
        where = f" ({self.origin})" if self.origin else ""
        path = self.path or "<root>"
        return f"{self.severity}: {path}: {self.message}{where}"


def _sort_key(f: Finding):
    if f.origin is None:
        return ("\uffff", 0, f.path, f.message)
    return (f.origin.file, f.origin.line, f.path, f.message)


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @classmethod
    def of(cls, findings: Iterable[Finding]) -> "ValidationReport":
        return cls(sorted(findings, key=_sort_key))

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "error"]

    @property
    def warnings(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def __len__(self) -> int:
        return len(self.findings)

    def __iter__(self):
        return iter(self.findings)

    def to_dict(self) -> dict:
        return {"findings": [f.to_dict() for f in self.findings]}
