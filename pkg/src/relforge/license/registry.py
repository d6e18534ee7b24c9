"""License and exception records backed by a bundled SPDX License List snapshot."""

from __future__ import annotations

import functools
import json
import re
from dataclasses import dataclass, replace
from importlib import resources
from typing import Iterable

from ..errors import LicenseError

# Common placeholder spellings in upstream license texts, mapped to <<field>>.
_PLACEHOLDER_ALIASES = [
    (re.compile(r"(?<!<)<year>(?!>)|\[year\]|\[yyyy\]|<yyyy>", re.I), "<<year>>"),
    (
        re.compile(
            r"(?<!<)<copyright holders?>(?!>)|(?<!<)<owner>(?!>)|\[fullname\]"
            r"|\[name of copyright owner\]|(?<!<)<name of author>(?!>)",
            re.I,
        ),
        "<<holder>>",
    ),
]


def normalize_placeholders(text: str) -> str:
    for pattern, marker in _PLACEHOLDER_ALIASES:
        text = pattern.sub(marker, text)
    return text


@dataclass(frozen=True)
class LicenseRecord:
    id: str
    name: str
    text: str | None = None
    osi_approved: bool = False
    fsf_libre: bool = False
    deprecated: bool = False

    @property
    def header(self) -> str:
        return f"SPDX-License-Identifier: {self.id}"

    def full_text(self) -> str:
        if self.text is not None:
            return self.text
        return (
            f"{self.name}\n\n{self.header}\n\n"
            f"The full text of this license is available at https://spdx.org/licenses/{self.id}.html\n"
        )


@dataclass(frozen=True)
class ExceptionRecord:
    id: str
    name: str
    deprecated: bool = False
    text: str | None = None

    def full_text(self) -> str:
        if self.text is not None:
            return self.text
        return (
            f"{self.name}\n\nSPDX license exception: {self.id}\n\n"
            f"The full text of this exception is available at https://spdx.org/licenses/{self.id}.html\n"
        )


class LicenseRegistry:
    """Immutable id -> record maps with case-insensitive lookup."""

    def __init__(self, licenses: Iterable[LicenseRecord] = (), exceptions: Iterable[ExceptionRecord] = (),
                 version: str = ""):
        self.version = version
        self._licenses: dict[str, LicenseRecord] = {}
        self._exceptions: dict[str, ExceptionRecord] = {}
        for rec in licenses:
            if rec.id.lower() in self._licenses:
                raise LicenseError(f"duplicate license id {rec.id!r}")
            self._licenses[rec.id.lower()] = rec
        for rec in exceptions:
            if rec.id.lower() in self._exceptions:
                raise LicenseError(f"duplicate exception id {rec.id!r}")
            self._exceptions[rec.id.lower()] = rec

    @classmethod
    def from_spdx(cls, doc: dict, texts: dict[str, str] | None = None) -> "LicenseRegistry":
        """Build from SPDX ``licenses.json``-style data (plus an ``exceptions`` list)."""
        texts = {k.lower(): v for k, v in (texts or {}).items()}
        licenses = [
            LicenseRecord(
                id=item["licenseId"],
                name=item.get("name", item["licenseId"]),
                text=normalize_placeholders(texts[item["licenseId"].lower()]) if item["licenseId"].lower() in texts else None,
                osi_approved=bool(item.get("isOsiApproved", False)),
                fsf_libre=bool(item.get("isFsfLibre", False)),
                deprecated=bool(item.get("isDeprecatedLicenseId", False)),
            )
            for item in doc.get("licenses", [])
        ]
        exceptions = [
            ExceptionRecord(
                id=item["licenseExceptionId"],
                name=item.get("name", item["licenseExceptionId"]),
                deprecated=bool(item.get("isDeprecatedLicenseId", False)),
            )
            for item in doc.get("exceptions", [])
        ]
        return cls(licenses, exceptions, str(doc.get("licenseListVersion", "")))

    def license(self, license_id: str) -> LicenseRecord | None:
        return self._licenses.get(license_id.lower())

    def exception(self, exception_id: str) -> ExceptionRecord | None:
        return self._exceptions.get(exception_id.lower())

    def with_license(self, record: LicenseRecord) -> "LicenseRegistry":
        """A copy with a user-defined license added."""
        if record.text is not None:
            record = replace(record, text=normalize_placeholders(record.text))
        return LicenseRegistry([*self._licenses.values(), record], self._exceptions.values(), self.version)

    def deprecated_ids(self) -> list[str]:
        return sorted((r.id for r in self._licenses.values() if r.deprecated), key=str.lower)

    def __len__(self) -> int:
        return len(self._licenses)


@functools.lru_cache(maxsize=1)
def default_registry() -> LicenseRegistry:
    data = resources.files("relforge") / "data"
    doc = json.loads((data / "spdx.json").read_text(encoding="utf-8"))
    texts = {
        p.name[: -len(".txt")]: p.read_text(encoding="utf-8")
        for p in (data / "license_texts").iterdir()
        if p.name.endswith(".txt")
    }
    return LicenseRegistry.from_spdx(doc, texts)
