"""Map repository events to deterministic action plans."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .config.tree import ConfigTree
from .errors import IssueError, PlanError, VersionError
from .issues import Ticket, apply_status_transition, compile_forms, normalize_status, parse_command_comment
from .issues import STATUSES, process_submission, refresh_form_choices
from .plans import CI_TASKS, ActionPlan, TaskItem
from .vcs import (
    DEFAULT_COMMIT_TEMPLATE,
    DEFAULT_COMMIT_TRAILER,
    DevelopmentBranch,
    MainBranch,
    PrereleaseBranch,
    ReleaseBranch,
    RepoState,
    classify_branch,
    plan_merge,
)
from .version import (
    DEFAULT_CHANGE_TYPES,
    ChangeType,
    PublicVersion,
    format_version,
    next_dev_version,
    next_prerelease_version,
    parse_version,
    tag_for,
)

log = logging.getLogger(__name__)

EVENT_KINDS = (
    "issue_opened",
    "issue_labeled",
    "comment_posted",
    "commit_pushed",
    "pr_approved",
    "merged",
    "scheduled",
)
REQUIRED_KEYS: dict[str, tuple[str, ...]] = {
    "issue_opened": ("form_id", "inputs", "number"),
    "issue_labeled": ("ticket", "label"),
    "comment_posted": ("issue", "text"),
    "commit_pushed": ("changes",),
    "pr_approved": ("source", "target", "change_type"),
    "merged": ("source", "target", "change_type"),
    "scheduled": (),
}
PATH_CLASSES = ("source", "config", "docs", "tests")

# Used when the control center does not define workflows.ci.
DEFAULT_CI_TABLE: tuple[dict, ...] = (
    {"id": "cca", "triggers": ["config", "source"]},
    {"id": "format", "triggers": ["source", "tests"]},
    {"id": "code-analysis", "triggers": ["source", "tests"]},
    {"id": "data-validation", "triggers": ["config", "source"]},
    {"id": "refactor", "triggers": ["source", "tests"]},
    {"id": "dependency-review", "triggers": ["source"]},
    {"id": "build", "triggers": ["source"], "release": True},
    {"id": "containerize", "triggers": ["source"], "release": True},
    {"id": "test", "triggers": ["source", "tests"]},
    {"id": "website-build", "triggers": ["source", "docs"], "release": True},
    {"id": "changelog-update", "triggers": ["source", "config", "docs", "tests"]},
    {"id": "draft-update", "triggers": ["source", "config", "docs"], "release": True},
    {"id": "progress-track", "triggers": ["source", "tests", "docs"]},
    {"id": "report", "triggers": ["always"]},
)
DEFAULT_PATH_CLASSES = {"config": [".control/"], "docs": ["docs/"], "tests": ["tests/"]}


@dataclass(frozen=True)
class RepoEvent:
    kind: str
    payload: Mapping[str, Any] = field(default_factory=dict)
    branch: str | None = None

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise PlanError(f"unknown event kind {self.kind!r}")
        missing = [k for k in REQUIRED_KEYS[self.kind] if k not in self.payload]
        if missing:
            raise PlanError(f"{self.kind} event is missing payload key(s): {', '.join(missing)}")
        if self.kind == "commit_pushed" and not self.branch:
            raise PlanError("commit_pushed event needs a branch")

    def to_dict(self) -> dict:
        doc: dict[str, Any] = {"kind": self.kind, "payload": dict(self.payload)}
        if self.branch is not None:
            doc["branch"] = self.branch
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "RepoEvent":
        if not isinstance(doc, Mapping) or "kind" not in doc:
            raise PlanError("event document needs a 'kind'")
        return cls(doc["kind"], dict(doc.get("payload", {})), doc.get("branch"))


# -- CI / CD ------------------------------------------------------------------


@dataclass(frozen=True)
class Changeset:
    """Touched path classes, plus whether the change is meant to be released."""

    classes: frozenset[str] = frozenset()
    release: bool = False

    def __post_init__(self):
        unknown = set(self.classes) - set(PATH_CLASSES)
        if unknown:
            raise PlanError(f"unknown path class(es): {', '.join(sorted(unknown))}")


def classify_paths(paths: Iterable[str], tree: ConfigTree | None = None) -> frozenset[str]:
    table = (tree.get("workflows.ci.path_classes", None) if tree else None) or DEFAULT_PATH_CLASSES
    classes = set()
    for path in paths:
        path = path.removeprefix("./")
        match = next(
            (cls for cls in sorted(table) for prefix in table[cls] if path == prefix.rstrip("/") or path.startswith(prefix)),
            "source",
        )
        classes.add(match)
    return frozenset(classes)


def _ci_table(tree: ConfigTree | None) -> list[dict]:
    table = (tree.get("workflows.ci.tasks", None) if tree else None) or list(DEFAULT_CI_TABLE)
    for row in table:
        if row["id"] not in CI_TASKS:
            raise PlanError(f"CI task {row['id']!r} is not in the task vocabulary")
    return sorted(table, key=lambda row: CI_TASKS.index(row["id"]))


def plan_ci(changeset: Changeset, tree: ConfigTree | None = None) -> list[str]:
    if not changeset.classes:
        return ["report"]
    out = []
    for row in _ci_table(tree):
        if row.get("release") and not changeset.release:
            continue
        triggers = set(row["triggers"])
        if "always" in triggers or triggers & changeset.classes:
            out.append(row["id"])
    return out


def plan_cd(result: Mapping[str, Any], tree: ConfigTree | None = None, *, dev: bool = False) -> list[TaskItem]:
    """``result`` carries the released ``version`` and the ``branch`` it was tagged on."""
    version = result.get("version")
    if version is None:
        raise PlanError("deployment needs a released version")
    if isinstance(version, str):
        version = parse_version(version)
    branch = result.get("branch")
    key = "workflows.cd.dev_targets" if dev else "workflows.cd.targets"
    targets = list(tree.get(key, []) or []) if tree else []
    if not targets:
        log.warning("no deployment targets configured; the plan has no publish step")
    text = format_version(version)
    tasks = [TaskItem("tag", {"tag": tag_for(version), "version": text, "branch": branch})]
    if not dev:
        tasks.append(TaskItem("changelog-finalize", {"version": text, "branch": branch}))
        tasks.append(TaskItem("notes-render", {"version": text}))
    tasks += [TaskItem(f"publish:{t}", {"version": text}) for t in targets]
    return tasks


# -- dispatch -------------------------------------------------------------------


def _change_type(value: str, tree: ConfigTree) -> ChangeType:
    mapping = {**DEFAULT_CHANGE_TYPES, **(tree.get("vcs.change_types", {}) or {})}
    try:
        return ChangeType.of(value, mapping)
    except VersionError as exc:
        raise PlanError(str(exc)) from None


def _commit_format(tree: ConfigTree) -> tuple[str, str]:
    return (
        tree.get("vcs.commit.template", DEFAULT_COMMIT_TEMPLATE),
        tree.get("vcs.commit.trailer", DEFAULT_COMMIT_TRAILER),
    )


def _on_issue_opened(event: RepoEvent, state: RepoState, tree: ConfigTree) -> list[TaskItem]:
    p = event.payload
    forms = refresh_form_choices(compile_forms(tree), state, p.get("api_index", tree.get("issues.api_endpoints", [])))
    form = next((f for f in forms if f.id == p["form_id"]), None)
    if form is None:
        raise PlanError(f"no issue form {p['form_id']!r}")
    ticket, protocol = process_submission(form, p, tree)
    return [TaskItem("process-submission", {"ticket": ticket.to_dict(), "protocol": protocol.render()})]


def _on_issue_labeled(event: RepoEvent, state: RepoState, tree: ConfigTree) -> list[TaskItem]:
    label = str(event.payload["label"])
    if normalize_status(label) not in STATUSES:
        return []
    ticket = Ticket.from_dict(event.payload["ticket"])
    return list(apply_status_transition(ticket, label, state, tree).tasks)


def _on_comment(event: RepoEvent, state: RepoState, tree: ConfigTree) -> list[TaskItem]:
    issue = event.payload["issue"]
    try:
        command = parse_command_comment(str(event.payload["text"]))
    except IssueError as exc:
        return [TaskItem("report", {"issue": issue, "error": str(exc)})]
    if command is None:
        return []
    return [TaskItem(command.verb, {"issue": issue, **command.args})]


def _on_push(event: RepoEvent, state: RepoState, tree: ConfigTree) -> list[TaskItem]:
    p = event.payload
    release = bool(p.get("release", False))
    kind = classify_branch(event.branch)
    ids = plan_ci(Changeset(classify_paths(p["changes"], tree), release), tree)
    tasks = [TaskItem(t, {"branch": event.branch}) for t in ids]
    if not release:
        return tasks
    try:
        if isinstance(kind, DevelopmentBranch):
            if "change_type" not in p:
                raise PlanError("a release-related push needs a change_type")
            c = _change_type(p["change_type"], tree)
            version = next_dev_version(
                state.issue_history(kind.issue), state.branch(kind.target).tags, c, kind.issue
            )
            tasks.append(TaskItem("dev-release", {"version": format_version(version), "branch": event.branch}))
            return tasks + plan_cd({"version": version, "branch": event.branch}, tree, dev=True)
        if isinstance(kind, PrereleaseBranch):
            phase = p.get("phase", kind.version.pre.phase)
            version = next_prerelease_version(state.issue_history(kind.issue), kind.issue, phase)
            return tasks + plan_cd({"version": version, "branch": event.branch}, tree)
    except VersionError as exc:
        raise PlanError(f"{event.branch}: {exc}") from None
    raise PlanError(f"release-related pushes are only planned on development or prerelease branches, not {event.branch}")


def _merge_plan(event: RepoEvent, state: RepoState, tree: ConfigTree):
    p = event.payload
    c = _change_type(p["change_type"], tree)
    template, trailer = _commit_format(tree)
    return plan_merge(
        p["source"], p["target"], state, c,
        title=p.get("title", ""), type_id=p.get("type"), template=template, trailer=trailer,
    )


def _on_pr_approved(event: RepoEvent, state: RepoState, tree: ConfigTree) -> list[TaskItem]:
    return [TaskItem("plan-merge", _merge_plan(event, state, tree).to_dict())]


def _on_merged(event: RepoEvent, state: RepoState, tree: ConfigTree) -> list[TaskItem]:
    target = classify_branch(event.payload["target"])
    if not isinstance(target, (MainBranch, ReleaseBranch, PrereleaseBranch)) or not event.payload.get("release", True):
        return []
    mp = _merge_plan(event, state, tree)
    # Normally created when the PR was approved; planned here only if still missing.
    tasks = [TaskItem("create-branch", b.to_dict()) for b in mp.prerequisites if b.name not in state.branches]
    version: PublicVersion | None = mp.version
    if "version" in event.payload:
        version = parse_version(event.payload["version"])
    return tasks + plan_cd({"version": version, "branch": mp.target}, tree)


def _on_scheduled(event: RepoEvent, state: RepoState, tree: ConfigTree) -> list[TaskItem]:
    prefix = tree.get("workflows.maintenance.branch_prefix", "maint/")
    run = str(event.payload.get("run", "scheduled"))
    branch = f"{prefix}{run}"
    base = state.main.name
    return [
        TaskItem("dependency-refresh-check", {"branch": base}),
        TaskItem("cca", {"branch": branch}),
        TaskItem("refactor", {"branch": branch}),
        TaskItem("test", {"branch": branch}),
        TaskItem("cleanup", {"branch": branch}),
        TaskItem("create-pr", {"head": branch, "base": base, "title": f"Scheduled maintenance ({run})"}),
    ]


_HANDLERS = {
    "issue_opened": _on_issue_opened,
    "issue_labeled": _on_issue_labeled,
    "comment_posted": _on_comment,
    "commit_pushed": _on_push,
    "pr_approved": _on_pr_approved,
    "merged": _on_merged,
    "scheduled": _on_scheduled,
}


def dispatch(event: RepoEvent, state: RepoState, tree: ConfigTree) -> ActionPlan:
    try:
        handler = _HANDLERS[event.kind]
    except KeyError:
        raise PlanError(f"unknown event kind {event.kind!r}") from None
    return ActionPlan(tuple(handler(event, state, tree)), event.to_dict())
