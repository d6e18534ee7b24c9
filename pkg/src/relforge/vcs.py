"""Branching model over an abstract repository snapshot.

Branch names::

    main                 the latest final release line
    release-<major>      an older major line kept for maintenance
    dev/<issue>/<target> work on one issue, merged back into <target>
    pre/<version>        prerelease line spun off a development branch

Planners never touch a repository; they return plans for an adapter.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Union

from .errors import PlanError, VersionError
from .version import (
    ChangeType,
    PublicVersion,
    TagHistory,
    bump,
    final,
    finalize_version,
    format_version,
    next_prerelease_version,
    parse_version,
    tag_for,
)

MAIN = "main"
DEFAULT_COMMIT_TEMPLATE = "{type}: {title} (#{issue})"
DEFAULT_COMMIT_TRAILER = "Issue: #{issue}"


@dataclass(frozen=True)
class MainBranch:
    label = "main"


@dataclass(frozen=True)
class ReleaseBranch:
    major: int
    label = "release"


@dataclass(frozen=True)
class DevelopmentBranch:
    issue: int
    target: str
    label = "development"


@dataclass(frozen=True)
class PrereleaseBranch:
    version: PublicVersion
    label = "prerelease"

    @property
    def issue(self) -> int:
        return self.version.pre.number


BranchKind = Union[MainBranch, ReleaseBranch, DevelopmentBranch, PrereleaseBranch]

_RELEASE = re.compile(r"release-(0|[1-9][0-9]*)")
_DEV = re.compile(r"dev/([1-9][0-9]*)/(.+)")
_PRE = re.compile(r"(?:pre|prerelease)/(.+)")


def classify_branch(name: str) -> BranchKind:
    if name == MAIN:
        return MainBranch()
    m = _RELEASE.fullmatch(name)
    if m:
        return ReleaseBranch(int(m.group(1)))
    m = _DEV.fullmatch(name)
    if m:
        target = m.group(2)
        if not isinstance(classify_branch(target), (MainBranch, ReleaseBranch)):
            raise PlanError(f"development branch {name!r} must target main or a release branch")
        return DevelopmentBranch(int(m.group(1)), target)
    m = _PRE.fullmatch(name)
    if m:
        try:
            v = parse_version(m.group(1))
        except VersionError as exc:
            raise PlanError(f"prerelease branch {name!r}: {exc}") from None
        if v.pre is None:
            raise PlanError(f"prerelease branch {name!r} must name a prerelease version")
        return PrereleaseBranch(v)
    raise PlanError(f"unrecognized branch name {name!r}")


def dev_branch_name(issue: int, target: str) -> str:
    return f"dev/{issue}/{target}"


def pre_branch_name(v: PublicVersion) -> str:
    return f"pre/{format_version(v)}"


@dataclass(frozen=True)
class Branch:
    name: str
    kind: BranchKind
    head: str
    tags: TagHistory = field(default_factory=TagHistory)

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind.label, "head": self.head, "tags": self.tags.tags()}


@dataclass(frozen=True)
class RepoState:
    branches: dict[str, Branch]
    default_branch: str = MAIN
    authors: tuple[str, ...] = ()

    def __post_init__(self):
        mains = [b.name for b in self.branches.values() if isinstance(b.kind, MainBranch)]
        if len(mains) != 1:
            raise PlanError(f"repository must have exactly one main branch, found {len(mains)}")
        if self.default_branch not in self.branches:
            raise PlanError(f"default branch {self.default_branch!r} does not exist")
        seen: dict[PublicVersion, str] = {}
        for b in self.branches.values():
            for v in b.tags:
                if v in seen:
                    raise PlanError(f"tag {tag_for(v)} appears on both {seen[v]} and {b.name}")
                seen[v] = b.name

    @classmethod
    def from_dict(cls, doc: dict) -> "RepoState":
        branches = {}
        for item in doc.get("branches", []):
            name = item["name"]
            if name in branches:
                raise PlanError(f"duplicate branch {name!r}")
            kind = classify_branch(name)
            declared = item.get("kind")
            if declared is not None and declared != kind.label:
                raise PlanError(f"branch {name!r} declared as {declared!r} but named like a {kind.label} branch")
            try:
                tags = TagHistory.from_tags(item.get("tags", []))
            except VersionError as exc:
                raise PlanError(f"branch {name!r}: {exc}") from None
            branches[name] = Branch(name, kind, str(item.get("head", "")), tags)
        return cls(branches, doc.get("default_branch", MAIN), tuple(doc.get("authors", ())))

    def to_dict(self) -> dict:
        doc: dict[str, Any] = {
            "branches": [self.branches[n].to_dict() for n in sorted(self.branches)],
            "default_branch": self.default_branch,
        }
        if self.authors:
            doc["authors"] = list(self.authors)
        return doc

    @classmethod
    def initial(cls, tags: Iterable[str] = (), head: str = "0" * 40) -> "RepoState":
        return cls({MAIN: Branch(MAIN, MainBranch(), head, TagHistory.from_tags(tags))})

    @property
    def main(self) -> Branch:
        return next(b for b in self.branches.values() if isinstance(b.kind, MainBranch))

    def branch(self, name: str) -> Branch:
        try:
            return self.branches[name]
        except KeyError:
            raise PlanError(f"branch {name!r} does not exist") from None

    def all_tags(self) -> TagHistory:
        return TagHistory(v for b in self.branches.values() for v in b.tags)

    def final_versions(self) -> list[PublicVersion]:
        return [v for v in self.all_tags() if v.is_final]

    def issue_history(self, issue: int) -> TagHistory:
        """Tags on every development and prerelease branch of ``issue``."""
        versions = []
        for b in self.branches.values():
            if isinstance(b.kind, (DevelopmentBranch, PrereleaseBranch)) and b.kind.issue == issue:
                versions.extend(b.tags)
        return TagHistory(versions)

    def branch_for_major(self, major: int) -> str | None:
        latest = self.main.tags.latest_final()
        if latest is not None and latest.release.major == major:
            return self.main.name
        name = f"release-{major}"
        return name if name in self.branches else None

    def with_branch(self, name: str, source: str, head: str | None = None) -> "RepoState":
        if name in self.branches:
            raise PlanError(f"branch {name!r} already exists")
        src = self.branch(source)
        new = Branch(name, classify_branch(name), src.head if head is None else head)
        return replace(self, branches={**self.branches, name: new})

    def with_tag(self, branch: str, v: PublicVersion) -> "RepoState":
        if v in self.all_tags():
            raise PlanError(f"tag {tag_for(v)} already exists")
        b = self.branch(branch)
        return replace(self, branches={**self.branches, branch: replace(b, tags=b.tags.add(v))})

    def with_head(self, branch: str, head: str) -> "RepoState":
        b = self.branch(branch)
        return replace(self, branches={**self.branches, branch: replace(b, head=head)})


# -- plans ----------------------------------------------------------------


@dataclass(frozen=True)
class BranchPlan:
    name: str
    source: str
    commit_message: str
    changelog_bootstrap: dict | None = None
    notice: str | None = None

    def to_dict(self) -> dict:
        doc = {"name": self.name, "source": self.source, "commit_message": self.commit_message}
        if self.changelog_bootstrap is not None:
            doc["changelog_bootstrap"] = self.changelog_bootstrap
        if self.notice is not None:
            doc["notice"] = self.notice
        return doc


@dataclass(frozen=True)
class MergePlan:
    source: str
    target: str
    strategy: str
    commit_message: str
    version_action: str  # none | finalize | dev-release | prerelease
    version: PublicVersion | None = None
    prerequisites: tuple[BranchPlan, ...] = ()

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "strategy": self.strategy,
            "commit_message": self.commit_message,
            "version_action": self.version_action,
            "version": None if self.version is None else format_version(self.version),
            "prerequisites": [p.to_dict() for p in self.prerequisites],
        }


def commit_message(
    type_id: str,
    title: str,
    issue: int,
    template: str = DEFAULT_COMMIT_TEMPLATE,
    trailer: str = DEFAULT_COMMIT_TRAILER,
) -> str:
    fields = {"type": type_id, "title": title, "issue": issue}
    return f"{template.format(**fields)}\n\n{trailer.format(**fields)}"


def plan_issue_branches(ticket, state: RepoState, template: str = DEFAULT_COMMIT_TEMPLATE,
                        trailer: str = DEFAULT_COMMIT_TRAILER) -> list[BranchPlan]:
    """One development branch per release line the ticket affects."""
    if ticket.status != "ready":
        raise PlanError(f"ticket #{ticket.number} is {ticket.status!r}, not ready for implementation")
    affected = list(ticket.affected_versions)
    if not affected:
        raise PlanError(f"ticket #{ticket.number} lists no affected version")

    sources: set[str] = set()
    for text in affected:
        if text == "unreleased":
            sources.add(state.main.name)
            continue
        try:
            v = parse_version(text)
        except VersionError as exc:
            raise PlanError(f"ticket #{ticket.number}: {exc}") from None
        source = state.branch_for_major(v.release.major)
        if source is None:
            raise PlanError(f"affected version {text} maps to no existing release branch")
        sources.add(source)

    def order(name: str):
        kind = classify_branch(name)
        return (1, 0) if isinstance(kind, MainBranch) else (0, kind.major)

    plans = []
    for source in sorted(sources, key=order):
        name = dev_branch_name(ticket.number, source)
        plans.append(BranchPlan(
            name=name,
            source=source,
            commit_message=commit_message(ticket.type_id, ticket.title, ticket.number, template, trailer),
            changelog_bootstrap={"issue": ticket.number, "type": ticket.type_id, "title": ticket.title, "branch": name},
            notice=f"Development of #{ticket.number} ({ticket.title}) is in progress on `{name}`.",
        ))
    return plans


def plan_release_branch_split(state: RepoState, c: ChangeType | str) -> BranchPlan | None:
    if ChangeType.of(c) is not ChangeType.MAJOR:
        return None
    latest = state.main.tags.latest_final()
    if latest is None:
        return None
    major = latest.release.major
    name = f"release-{major}"
    if name in state.branches:
        return None
    return BranchPlan(
        name=name,
        source=state.main.name,
        commit_message=f"chore: preserve the {major}.x release line on {name}",
    )


def plan_merge(
    source: str,
    target: str,
    state: RepoState,
    c: ChangeType | str,
    *,
    title: str = "",
    type_id: str | None = None,
    template: str = DEFAULT_COMMIT_TEMPLATE,
    trailer: str = DEFAULT_COMMIT_TRAILER,
) -> MergePlan:
    c = ChangeType.of(c)
    src = state.branch(source)
    tgt_kind = classify_branch(target)
    prerequisites: list[BranchPlan] = []

    if isinstance(src.kind, DevelopmentBranch):
        if isinstance(tgt_kind, (MainBranch, ReleaseBranch)):
            if target != src.kind.target:
                raise PlanError(f"{source} targets {src.kind.target}, not {target}")
            action = "finalize"
        elif isinstance(tgt_kind, PrereleaseBranch):
            if tgt_kind.issue != src.kind.issue:
                raise PlanError(f"{target} belongs to issue #{tgt_kind.issue}, not #{src.kind.issue}")
            action = "prerelease"
        else:
            raise PlanError(f"cannot merge development branch {source} into {target}")
    elif isinstance(src.kind, PrereleaseBranch):
        if not isinstance(tgt_kind, (MainBranch, ReleaseBranch)):
            raise PlanError(f"prerelease branch {source} can only merge into main or a release branch")
        action = "finalize"
    else:
        raise PlanError(f"{source} is a {src.kind.label} branch; only development and prerelease branches merge")

    issue = src.kind.issue
    history = state.issue_history(issue)
    if action == "finalize":
        if target not in state.branches:
            raise PlanError(f"branch {target!r} does not exist")
        if isinstance(tgt_kind, MainBranch):
            split = plan_release_branch_split(state, c)
            if split is not None:
                prerequisites.append(split)
        target_history = state.branch(target).tags
        candidates = list(history)
        try:
            if candidates:
                release = finalize_version(max(candidates), target_history, c)
            else:
                latest = target_history.latest_final()
                if latest is None:
                    raise VersionError("target history contains no final release")
                release = bump(latest.release, c)
        except VersionError as exc:
            raise PlanError(f"cannot determine the final version for {target}: {exc}") from None
        version = final(release)
    else:
        if target not in state.branches:
            prerequisites.append(BranchPlan(
                name=target,
                source=source,
                commit_message=f"chore: open prerelease line {target} for #{issue}",
            ))
        try:
            version = next_prerelease_version(history, issue, tgt_kind.version.pre.phase)
        except VersionError as exc:
            raise PlanError(f"cannot determine the prerelease version for {target}: {exc}") from None

    message = commit_message(type_id or c.value, title or f"resolve issue {issue}", issue, template, trailer)
    return MergePlan(source, target, "squash", message, action, version, tuple(prerequisites))
