"""Public version identifiers and the issue-driven release calculus.

Grammar (a strict subset of PyPA version specifiers)::

    version = release [pre] ["." post] ["." dev]
    release = int "." int "." int
    pre     = ("a" | "b" | "rc") int
    post    = "post" int
    dev     = "dev" int
    int     = "0" | nonzero-digit *digit

Post and dev segments only appear on prereleases and never together.
The prerelease number is the issue ticket that produced the release, so
several issues can publish candidates for the same base concurrently.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Mapping

from .errors import VersionError

PHASES = ("a", "b", "rc")
TAG_PREFIX = "v"

DEFAULT_CHANGE_TYPES: dict[str, str] = {
    "breaking": "major",
    "feature": "minor",
    "bugfix": "patch",
    "bug": "patch",
}


class ChangeType(str, Enum):
    MAJOR = "major"
    MINOR = "minor"
    PATCH = "patch"

    @classmethod
    def of(cls, value: "str | ChangeType", mapping: Mapping[str, str] | None = None) -> "ChangeType":
        """Accept a level name or an issue-type id resolved through ``mapping``."""
        if isinstance(value, ChangeType):
            return value
        try:
            return cls(value)
        except ValueError:
            pass
        table = DEFAULT_CHANGE_TYPES if mapping is None else mapping
        if value in table:
            return cls(table[value])
        raise VersionError(f"unknown change type {value!r}")


@dataclass(frozen=True, order=True)
class ReleaseVersion:
    major: int
    minor: int
    patch: int

    def __post_init__(self):
        for part in (self.major, self.minor, self.patch):
            if isinstance(part, bool) or not isinstance(part, int) or part < 0:
                raise VersionError(f"release components must be non-negative integers, got {part!r}")

    def __str__(self) -> str:
        return f"{self.major}.{self.minor}.{self.patch}"


@dataclass(frozen=True)
class Prerelease:
    phase: str
    number: int

    def __post_init__(self):
        if self.phase not in PHASES:
            raise VersionError(f"prerelease phase {self.phase!r} is not one of {'|'.join(PHASES)}")
        if isinstance(self.number, bool) or not isinstance(self.number, int) or self.number < 1:
            raise VersionError(f"prerelease number must be a positive integer, got {self.number!r}")

    @property
    def rank(self) -> int:
        return PHASES.index(self.phase)


def _positive(value, what: str) -> None:
    if value is not None and (isinstance(value, bool) or not isinstance(value, int) or value < 1):
        raise VersionError(f"{what} number must be a positive integer, got {value!r}")


@functools.total_ordering
@dataclass(frozen=True)
class PublicVersion:
    release: ReleaseVersion
    pre: Prerelease | None = None
    post: int | None = None
    dev: int | None = None

    def __post_init__(self):
        _positive(self.post, "post-release")
        _positive(self.dev, "dev-release")
        if self.pre is None and (self.post is not None or self.dev is not None):
            raise VersionError("post and dev segments require a prerelease segment")
        if self.post is not None and self.dev is not None:
            raise VersionError("dev and post segments are mutually exclusive")

    @property
    def is_final(self) -> bool:
        return self.pre is None

    def sort_key(self) -> tuple:
        r = self.release
        pre = (len(PHASES), 0) if self.pre is None else (self.pre.rank, self.pre.number)
        if self.dev is not None:
            seg = (0, self.dev)
        elif self.post is not None:
            seg = (2, self.post)
        else:
            seg = (1, 0)
        return (r.major, r.minor, r.patch, pre, seg)

    def __lt__(self, other: "PublicVersion") -> bool:
        if not isinstance(other, PublicVersion):
            return NotImplemented
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return format_version(self)

    @classmethod
    def parse(cls, text: str) -> "PublicVersion":
        return parse_version(text)


# -- text form ------------------------------------------------------------


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def at(self, literal: str) -> bool:
        return self.text.startswith(literal, self.pos)

    def expect(self, literal: str) -> None:
        if not self.at(literal):
            raise VersionError(f"invalid version {self.text!r}: expected {literal!r}", self.pos)
        self.pos += len(literal)

    def integer(self) -> int:
        start = self.pos
        text = self.text
        while self.pos < len(text) and "0" <= text[self.pos] <= "9":
            self.pos += 1
        digits = text[start : self.pos]
        if not digits:
            raise VersionError(f"invalid version {text!r}: expected a number", start)
        if len(digits) > 1 and digits[0] == "0":
            raise VersionError(f"invalid version {text!r}: leading zero", start)
        return int(digits)


def parse_version(text: str) -> PublicVersion:
    s = _Scanner(text)
    major = s.integer()
    s.expect(".")
    minor = s.integer()
    s.expect(".")
    patch = s.integer()
    release = ReleaseVersion(major, minor, patch)

    pre = post = dev = None
    for phase in ("rc", "a", "b"):
        if s.at(phase):
            s.pos += len(phase)
            start = s.pos
            number = s.integer()
            if number < 1:
                raise VersionError(f"invalid version {text!r}: prerelease number must be positive", start)
            pre = Prerelease(phase, number)
            break
    if s.at(".post"):
        if pre is None:
            raise VersionError(f"invalid version {text!r}: post-release requires a prerelease", s.pos)
        s.pos += len(".post")
        start = s.pos
        post = s.integer()
        if post < 1:
            raise VersionError(f"invalid version {text!r}: post number must be positive", start)
    if s.at(".dev"):
        if pre is None:
            raise VersionError(f"invalid version {text!r}: dev-release requires a prerelease", s.pos)
        if post is not None:
            raise VersionError(f"invalid version {text!r}: dev and post are mutually exclusive", s.pos)
        s.pos += len(".dev")
        start = s.pos
        dev = s.integer()
        if dev < 1:
            raise VersionError(f"invalid version {text!r}: dev number must be positive", start)
    if s.pos != len(text):
        raise VersionError(f"invalid version {text!r}: unexpected {text[s.pos]!r}", s.pos)
    return PublicVersion(release, pre, post, dev)


def format_version(v: PublicVersion) -> str:
    out = str(v.release)
    if v.pre is not None:
        out += f"{v.pre.phase}{v.pre.number}"
    if v.post is not None:
        out += f".post{v.post}"
    if v.dev is not None:
        out += f".dev{v.dev}"
    return out


def compare(a: PublicVersion, b: PublicVersion) -> int:
    """Three-way comparison: -1, 0 or 1."""
    ka, kb = a.sort_key(), b.sort_key()
    return (ka > kb) - (ka < kb)


def tag_for(v: PublicVersion) -> str:
    return TAG_PREFIX + format_version(v)


def parse_tag(tag: str) -> PublicVersion:
    if not tag.startswith(TAG_PREFIX):
        raise VersionError(f"tag {tag!r} does not start with {TAG_PREFIX!r}", 0)
    try:
        return parse_version(tag[len(TAG_PREFIX) :])
    except VersionError as exc:
        pos = None if exc.position is None else exc.position + len(TAG_PREFIX)
        raise VersionError(f"invalid tag {tag!r}", pos) from None


# -- history and calculus ---------------------------------------------------


class TagHistory:
    """Ordered, duplicate-free set of versions tagged on a branch lineage."""

    def __init__(self, versions: Iterable[PublicVersion] = ()):
        versions = list(versions)
        unique = set(versions)
        if len(unique) != len(versions):
            dupes = sorted({format_version(v) for v in versions if versions.count(v) > 1})
            raise VersionError(f"duplicate versions in tag history: {', '.join(dupes)}")
        self._versions = tuple(sorted(unique))

    @classmethod
    def from_tags(cls, tags: Iterable[str]) -> "TagHistory":
        return cls(parse_tag(t) for t in tags)

    def __iter__(self) -> Iterator[PublicVersion]:
        return iter(self._versions)

    def __len__(self) -> int:
        return len(self._versions)

    def __contains__(self, v: object) -> bool:
        return v in self._versions

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TagHistory) and self._versions == other._versions

    def __repr__(self) -> str:
        return f"TagHistory([{', '.join(map(format_version, self._versions))}])"

    def tags(self) -> list[str]:
        return [tag_for(v) for v in self._versions]

    def finals(self) -> list[PublicVersion]:
        return [v for v in self._versions if v.is_final]

    def latest_final(self) -> PublicVersion | None:
        finals = self.finals()
        return finals[-1] if finals else None

    def for_issue(self, issue: int) -> list[PublicVersion]:
        return [v for v in self._versions if v.pre is not None and v.pre.number == issue]

    def add(self, v: PublicVersion) -> "TagHistory":
        if v in self._versions:
            raise VersionError(f"version {format_version(v)} is already tagged")
        return TagHistory(self._versions + (v,))

    def union(self, other: "TagHistory") -> "TagHistory":
        return TagHistory(sorted(set(self._versions) | set(other._versions)))


def bump(r: ReleaseVersion, c: ChangeType | str) -> ReleaseVersion:
    c = ChangeType.of(c)
    if c is ChangeType.MAJOR:
        return ReleaseVersion(r.major + 1, 0, 0)
    if c is ChangeType.MINOR:
        return ReleaseVersion(r.major, r.minor + 1, 0)
    return ReleaseVersion(r.major, r.minor, r.patch + 1)


def _latest_final(history: TagHistory) -> PublicVersion:
    latest = history.latest_final()
    if latest is None:
        raise VersionError("target history contains no final release")
    return latest


def next_dev_version(
    dev_history: TagHistory, target_history: TagHistory, c: ChangeType | str, issue: int
) -> PublicVersion:
    """Next developmental release for ``issue`` on its development branch."""
    if issue < 1:
        raise VersionError(f"issue number must be positive, got {issue}")
    base = bump(_latest_final(target_history).release, c)
    mine = [v for v in dev_history.for_issue(issue) if v.release == base]
    if any(v.dev is None for v in mine):
        published = max(v for v in mine if v.dev is None)
        raise VersionError(
            f"issue #{issue} already published {format_version(published)}; "
            "further iterations are post-releases"
        )
    phase = PHASES[max((v.pre.rank for v in mine), default=0)]
    dev = 1 + max((v.dev for v in mine if v.pre.phase == phase), default=0)
    return PublicVersion(base, Prerelease(phase, issue), dev=dev)


def next_prerelease_version(history: TagHistory, issue: int, phase: str) -> PublicVersion:
    """Publish ``phase`` for ``issue``: a new stage, or a post-release within one."""
    if phase not in PHASES:
        raise VersionError(f"prerelease phase {phase!r} is not one of {'|'.join(PHASES)}")
    mine = history.for_issue(issue)
    if not mine:
        raise VersionError(f"no versions tagged for issue #{issue}")
    latest = max(mine)
    base, current = latest.release, latest.pre
    if PHASES.index(phase) < current.rank:
        raise VersionError(f"phase regression for issue #{issue}: {current.phase} -> {phase}")
    published = [v for v in mine if v.release == base and v.pre.phase == phase and v.dev is None]
    if PHASES.index(phase) > current.rank or not published:
        return PublicVersion(base, Prerelease(phase, issue))
    post = 1 + max(v.post or 0 for v in published)
    return PublicVersion(base, Prerelease(phase, issue), post=post)


def finalize_version(candidate: PublicVersion, target_history: TagHistory, c: ChangeType | str) -> ReleaseVersion:
    """Redetermine the final release at merge time.

    The candidate's own triple is ignored: another issue may have claimed it
    in the meantime, so the result is always computed from the target.
    """
    if candidate.pre is None:
        raise VersionError(f"candidate {format_version(candidate)} is not a prerelease")
    return bump(_latest_final(target_history).release, c)


def final(r: ReleaseVersion) -> PublicVersion:
    return PublicVersion(r)
