"""Issue forms, ticket processing, protocol documents and status transitions."""

from __future__ import annotations

import json
import logging
import re
import shlex
import string
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping

import yaml

from .config.tree import ConfigTree
from .errors import CommandError, IssueError, VersionError
from .plans import ActionPlan, TaskItem
from .version import format_version, parse_version

log = logging.getLogger(__name__)

FIELD_KINDS = ("dropdown", "text", "textarea", "checkboxes")
STATUSES = ("triage", "rejected", "ready", "in-progress", "review", "done")
TRANSITIONS: dict[str, frozenset[str]] = {
    "triage": frozenset({"rejected", "ready"}),
    "ready": frozenset({"in-progress"}),
    "in-progress": frozenset({"review"}),
    "review": frozenset({"in-progress", "done"}),
}
UNRELEASED = "unreleased"
FORM_DIR = ".github/ISSUE_TEMPLATE"

DEFAULT_PROTOCOL_TEMPLATE = """\
# {title} (#{number})

## User Requirements Document (URD)

{urd}

## Software Requirements Document (SRD)

{srd}

## Software Design Document (SDD)

{sdd}

## Tasks

{tasks}

## Pull Requests

{prs}

## Activity Log

{log}
"""
_STATE_OPEN = "<!-- relforge:protocol"
_STATE_CLOSE = "-->"


# -- forms ----------------------------------------------------------------


@dataclass(frozen=True)
class FormField:
    key: str
    kind: str
    label: str = ""
    options: tuple[str, ...] = ()
    required: bool = False
    multiple: bool = False
    source: str | None = None  # "versions" | "api" | None
    hidden: bool = False

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise IssueError(f"field {self.key!r}: kind {self.kind!r} is not one of {'|'.join(FIELD_KINDS)}")
        if self.kind == "dropdown" and self.source is None and not self.options:
            raise IssueError(f"dropdown {self.key!r} needs at least one option")


@dataclass(frozen=True)
class FormDefinition:
    id: str
    issue_type: str
    name: str
    description: str
    title_template: str
    fields: tuple[FormField, ...]

    def __post_init__(self):
        keys = [f.key for f in self.fields]
        if len(set(keys)) != len(keys):
            raise IssueError(f"form {self.id!r} has duplicate field keys")

    def field(self, key: str) -> FormField | None:
        return next((f for f in self.fields if f.key == key), None)

    @property
    def path(self) -> str:
        return f"{FORM_DIR}/{self.id}.yaml"

    def to_document(self) -> dict:
        """Issue-form YAML structure (name, description, title, labels, body)."""
        body = []
        for f in self.fields:
            if f.hidden:
                continue
            attrs: dict[str, Any] = {"label": f.label or f.key}
            item: dict[str, Any] = {"type": {"text": "input"}.get(f.kind, f.kind), "id": f.key, "attributes": attrs}
            if f.kind == "dropdown":
                attrs["options"] = list(f.options)
                if f.multiple:
                    attrs["multiple"] = True
            elif f.kind == "checkboxes":
                attrs["options"] = [{"label": o} for o in f.options]
            if f.kind != "checkboxes":
                item["validations"] = {"required": f.required}
            body.append(item)
        prefix = self.title_template.split("{", 1)[0]
        return {
            "name": self.name,
            "description": self.description,
            "title": prefix,
            "labels": [f"type/{self.issue_type}", "status/triage"],
            "body": body,
        }

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_document(), sort_keys=False, allow_unicode=True, width=1000)


def compile_forms(tree: ConfigTree) -> list[FormDefinition]:
    types = tree.get("issues.types", [])
    if not types:
        log.warning("no issue types configured; no forms compiled")
        return []
    forms: dict[str, FormDefinition] = {}
    for decl in types:
        type_id = decl.get("id")
        if not type_id:
            raise IssueError("issue type without an 'id'")
        if "fields" not in decl:
            raise IssueError(f"issue type {type_id!r} declares no fields")
        form_id = decl.get("form", type_id)
        if form_id in forms:
            raise IssueError(f"duplicate form id {form_id!r}")
        fields = tuple(
            FormField(
                key=f["key"],
                kind=f["kind"],
                label=f.get("label", ""),
                options=tuple(str(o) for o in f.get("options", ())),
                required=bool(f.get("required", False)),
                multiple=bool(f.get("multiple", False)),
                source=f.get("source"),
            )
            for f in decl["fields"]
        )
        forms[form_id] = FormDefinition(
            id=form_id,
            issue_type=type_id,
            name=decl.get("name", type_id),
            description=decl.get("description", ""),
            title_template=decl.get("title", "{summary}"),
            fields=fields,
        )
    return [forms[k] for k in sorted(forms)]


def refresh_form_choices(
    forms: Iterable[FormDefinition],
    state=None,
    api_index: Iterable[str] = (),
    *,
    versions: Iterable[str] | None = None,
) -> list[FormDefinition]:
    """Repopulate source-backed dropdowns from released versions and API endpoints.

    ``versions`` overrides the final releases read from ``state``.
    """
    if versions is None:
        finals = sorted(state.final_versions(), reverse=True) if state is not None else []
        versions = [format_version(v) for v in finals]
    versions = tuple(versions) or (UNRELEASED,)
    endpoints = tuple(dict.fromkeys(api_index))
    out = []
    for form in forms:
        fields = []
        for f in form.fields:
            if f.source == "versions":
                f = replace(f, options=versions, hidden=False)
            elif f.source == "api":
                if endpoints:
                    f = replace(f, options=endpoints, hidden=False)
                else:
                    f = replace(f, options=(), hidden=True, required=False)
            fields.append(f)
        out.append(replace(form, fields=tuple(fields)))
    return out


# -- tickets --------------------------------------------------------------


def derive_labels(type_id: str, versions: Iterable[str], endpoints: Iterable[str]) -> tuple[str, ...]:
    labels = {f"type/{type_id}"}
    labels.update(f"version/{v}" for v in versions)
    labels.update(f"api/{e}" for e in endpoints)
    return tuple(sorted(labels))


@dataclass(frozen=True)
class Ticket:
    number: int
    type_id: str
    title: str
    inputs: Mapping[str, Any]
    labels: tuple[str, ...] = ()
    assignees: tuple[str, ...] = ()
    status: str = "triage"
    affected_versions: tuple[str, ...] = ()
    endpoints: tuple[str, ...] = ()

    def __post_init__(self):
        if self.status not in STATUSES:
            raise IssueError(f"unknown status {self.status!r}")
        if isinstance(self.number, bool) or not isinstance(self.number, int) or self.number < 1:
            raise IssueError(f"ticket number must be a positive integer, got {self.number!r}")

    def moved_to(self, status: str) -> "Ticket":
        status = normalize_status(status)
        if status not in TRANSITIONS.get(self.status, ()):
            raise IssueError(f"illegal status transition for #{self.number}: {self.status} -> {status}")
        return replace(self, status=status)

    def to_dict(self) -> dict:
        return {
            "number": self.number,
            "type": self.type_id,
            "title": self.title,
            "inputs": dict(self.inputs),
            "labels": list(self.labels),
            "assignees": list(self.assignees),
            "status": self.status,
            "affected_versions": list(self.affected_versions),
            "endpoints": list(self.endpoints),
        }

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "Ticket":
        affected = tuple(doc.get("affected_versions", ()))
        endpoints = tuple(doc.get("endpoints", ()))
        type_id = doc["type"]
        return cls(
            number=int(doc["number"]),
            type_id=type_id,
            title=doc.get("title", ""),
            inputs=dict(doc.get("inputs", {})),
            labels=tuple(doc.get("labels", derive_labels(type_id, affected, endpoints))),
            assignees=tuple(doc.get("assignees", ())),
            status=doc.get("status", "triage"),
            affected_versions=affected,
            endpoints=endpoints,
        )


def normalize_status(label: str) -> str:
    status = label.removeprefix("status/").strip().lower().replace(" ", "-")
    return {"ready-for-implementation": "ready"}.get(status, status)


# -- protocol documents -----------------------------------------------------


@dataclass(frozen=True)
class Task:
    text: str
    done: bool = False


@dataclass(frozen=True)
class ProtocolDoc:
    number: int
    title: str
    urd: str
    srd: str = ""
    sdd: str = ""
    tasks: tuple[Task, ...] = ()
    log: tuple[str, ...] = ()
    prs: tuple[int, ...] = ()
    template: str = DEFAULT_PROTOCOL_TEMPLATE

    @property
    def done_count(self) -> int:
        return sum(t.done for t in self.tasks)

    @property
    def remaining_count(self) -> int:
        return len(self.tasks) - self.done_count

    def mark_done(self, index: int) -> "ProtocolDoc":
        """Mark the 1-based task ``index`` complete.  Already-done tasks stay done."""
        if not 1 <= index <= len(self.tasks):
            raise IndexError(index)
        tasks = list(self.tasks)
        tasks[index - 1] = replace(tasks[index - 1], done=True)
        return replace(self, tasks=tuple(tasks))

    def append_log(self, line: str) -> "ProtocolDoc":
        return replace(self, log=self.log + (line,))

    def link_pr(self, number: int) -> "ProtocolDoc":
        return self if number in self.prs else replace(self, prs=self.prs + (number,))

    def state(self) -> dict:
        return {
            "number": self.number,
            "title": self.title,
            "urd": self.urd,
            "srd": self.srd,
            "sdd": self.sdd,
            "tasks": [{"text": t.text, "done": t.done} for t in self.tasks],
            "log": list(self.log),
            "prs": list(self.prs),
        }

    def render(self) -> str:
        values = {
            "number": self.number,
            "title": self.title,
            "urd": self.urd,
            "srd": self.srd,
            "sdd": self.sdd,
            "tasks": "\n".join(f"- [{'x' if t.done else ' '}] {t.text}" for t in self.tasks) or "_None._",
            "prs": "\n".join(f"- #{n}" for n in self.prs) or "_None yet._",
            "log": "\n".join(f"- {line}" for line in self.log) or "_Empty._",
        }
        unknown = [name for _, name, _, _ in string.Formatter().parse(self.template) if name and name not in values]
        if unknown:
            raise IssueError(f"protocol template uses unknown field(s): {', '.join(unknown)}")
        body = self.template.format(**values).rstrip("\n")
        state = json.dumps(self.state(), indent=1, sort_keys=True)
        return f"{body}\n\n{_STATE_OPEN}\n{state}\n{_STATE_CLOSE}\n"

    @classmethod
    def from_markdown(cls, text: str, template: str = DEFAULT_PROTOCOL_TEMPLATE) -> "ProtocolDoc":
        start = text.rfind(_STATE_OPEN)
        if start < 0:
            raise IssueError("protocol document has no machine-readable section")
        end = text.find(_STATE_CLOSE, start + len(_STATE_OPEN))
        if end < 0:
            raise IssueError("protocol document machine section is not terminated")
        doc = json.loads(text[start + len(_STATE_OPEN) : end])
        return cls(
            number=doc["number"],
            title=doc["title"],
            urd=doc["urd"],
            srd=doc.get("srd", ""),
            sdd=doc.get("sdd", ""),
            tasks=tuple(Task(t["text"], bool(t["done"])) for t in doc.get("tasks", ())),
            log=tuple(doc.get("log", ())),
            prs=tuple(doc.get("prs", ())),
            template=template,
        )


def _as_list(value: Any) -> list[str]:
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    return [str(value)]


def _format_urd(form: FormDefinition, inputs: Mapping[str, Any]) -> str:
    blocks = []
    for f in form.fields:
        if f.key not in inputs:
            continue
        value = inputs[f.key]
        if f.kind in ("dropdown", "checkboxes"):
            text = "\n".join(f"- {v}" for v in _as_list(value)) or "_None._"
        else:
            text = str(value).strip() or "_None._"
        blocks.append(f"### {f.label or f.key}\n\n{text}")
    return "\n\n".join(blocks)


class _Blank(dict):
    def __missing__(self, key):
        return ""


def process_submission(
    form: FormDefinition,
    payload: Mapping[str, Any],
    tree: ConfigTree,
    number: int | None = None,
) -> tuple[Ticket, ProtocolDoc]:
    """Turn a form submission ``{form_id, inputs, number?, created_at?}`` into a ticket."""
    if payload.get("form_id", form.id) != form.id:
        raise IssueError(f"payload is for form {payload.get('form_id')!r}, not {form.id!r}")
    number = number if number is not None else payload.get("number")
    if number is None:
        raise IssueError("submission has no ticket number")
    inputs = dict(payload.get("inputs", {}))

    unknown = sorted(set(inputs) - {f.key for f in form.fields})
    if unknown:
        raise IssueError(f"unknown field(s) for form {form.id}: {', '.join(unknown)}")
    missing = [f.key for f in form.fields if f.required and not _as_list(inputs.get(f.key)) or
               (f.required and isinstance(inputs.get(f.key), str) and not inputs[f.key].strip())]
    if missing:
        raise IssueError(f"missing required field(s): {', '.join(missing)}")

    versions: list[str] = []
    endpoints: list[str] = []
    for f in form.fields:
        if f.key not in inputs:
            continue
        value = inputs[f.key]
        if f.kind in ("dropdown", "checkboxes"):
            values = _as_list(value)
            if f.kind == "dropdown" and not f.multiple and len(values) > 1:
                raise IssueError(f"field {f.key!r} accepts a single value")
            for v in values:
                if v not in f.options:
                    raise IssueError(f"unknown value {v!r} for field {f.key!r}")
            if f.source == "versions":
                versions.extend(values)
            elif f.source == "api":
                endpoints.extend(values)
        elif not isinstance(value, str):
            raise IssueError(f"field {f.key!r} expects text")

    flat = _Blank({k: ", ".join(_as_list(v)) for k, v in inputs.items()})
    title = string.Formatter().vformat(form.title_template, (), flat).strip()
    governance = tree.get("issues.governance", {}) or {}
    ticket = Ticket(
        number=int(number),
        type_id=form.issue_type,
        title=title,
        inputs=inputs,
        labels=derive_labels(form.issue_type, versions, endpoints),
        assignees=tuple(governance.get(form.issue_type, ())),
        affected_versions=tuple(dict.fromkeys(versions)),
        endpoints=tuple(dict.fromkeys(endpoints)),
    )

    cfg = tree.get("issues.protocol", {}) or {}
    when = payload.get("created_at")
    entry = f"submitted via {form.id}"
    protocol = ProtocolDoc(
        number=ticket.number,
        title=title,
        urd=_format_urd(form, inputs),
        srd=cfg.get("srd", ""),
        sdd=cfg.get("sdd", ""),
        tasks=tuple(Task(t) for t in cfg.get("tasks", ())),
        log=(f"{when}: {entry}" if when else entry,),
        template=cfg.get("template", DEFAULT_PROTOCOL_TEMPLATE),
    )
    return ticket, protocol


def apply_status_transition(ticket: Ticket, new_label: str, state=None, tree: ConfigTree | None = None) -> ActionPlan:
    """Plan the automation triggered by a status label change."""
    from .vcs import DEFAULT_COMMIT_TEMPLATE, DEFAULT_COMMIT_TRAILER, plan_issue_branches

    moved = ticket.moved_to(new_label)
    provenance = {"issue": ticket.number, "from": ticket.status, "to": moved.status}
    n = ticket.number
    if moved.status == "rejected":
        return ActionPlan((
            TaskItem("close-ticket", {"issue": n, "reason": "rejected"}),
            TaskItem("protocol-append", {"issue": n, "text": "Ticket rejected and closed."}),
        ), provenance)
    if moved.status == "ready":
        if state is None:
            raise IssueError("a repository state is required to plan development branches")
        template = tree.get("vcs.commit.template", DEFAULT_COMMIT_TEMPLATE) if tree else DEFAULT_COMMIT_TEMPLATE
        trailer = tree.get("vcs.commit.trailer", DEFAULT_COMMIT_TRAILER) if tree else DEFAULT_COMMIT_TRAILER
        plans = plan_issue_branches(moved, state, template, trailer)
        tasks = [TaskItem("plan-issue-branches", {"issue": n, "branches": [p.name for p in plans]})]
        tasks += [TaskItem("create-branch", p.to_dict()) for p in plans]
        tasks += [
            TaskItem("open-draft-pr", {"issue": n, "head": p.name, "base": p.source, "title": moved.title, "draft": True})
            for p in plans
        ]
        tasks += [TaskItem("changelog-bootstrap", {"branch": p.name, **p.changelog_bootstrap}) for p in plans]
        tasks.append(TaskItem("protocol-append", {"issue": n, "text": "Ready for implementation."}))
        return ActionPlan(tuple(tasks), provenance)
    return ActionPlan(
        (TaskItem("protocol-append", {"issue": n, "text": f"Status changed to {moved.status}."}),), provenance
    )


# -- commands ---------------------------------------------------------------


@dataclass(frozen=True)
class CommandSpec:
    required: tuple[str, ...]
    optional: tuple[str, ...] = ()


COMMANDS: dict[str, CommandSpec] = {
    "test": CommandSpec(required=("version",), optional=("env", "cases")),
}

_SIGIL = "/"
_VERB = re.compile(r"[a-z][a-z0-9-]*")


@dataclass(frozen=True)
class Command:
    verb: str
    args: Mapping[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"verb": self.verb, "args": dict(self.args)}


def _parse_args(verb: str, spec: CommandSpec, rest: str) -> dict[str, Any]:
    expected = list(spec.required + spec.optional)
    try:
        words = shlex.split(rest)
    except ValueError as exc:
        raise CommandError(verb, str(exc), expected) from None
    args: dict[str, Any] = {}
    for word in words:
        key, sep, value = word.partition("=")
        if not sep or not key:
            raise CommandError(verb, f"argument {word!r} is not key=value", expected)
        if key not in expected:
            raise CommandError(verb, f"unknown argument {key!r}", expected)
        if key in args:
            raise CommandError(verb, f"argument {key!r} given twice", expected)
        args[key] = value
    missing = [k for k in spec.required if k not in args]
    if missing:
        raise CommandError(verb, f"missing argument(s) {', '.join(missing)}", expected)
    if "version" in args:
        try:
            args["version"] = format_version(parse_version(args["version"]))
        except VersionError as exc:
            raise CommandError(verb, f"version: {exc}", expected) from None
    if "cases" in args:
        args["cases"] = [c for c in args["cases"].split(",") if c]
    return args


def parse_command_comment(text: str) -> Command | None:
    """The first ``/verb key=value ...`` line naming a registered verb, if any."""
    for line in text.splitlines():
        line = line.strip()
        if not line.startswith(_SIGIL):
            continue
        head, _, rest = line[len(_SIGIL):].partition(" ")
        if not _VERB.fullmatch(head) or head not in COMMANDS:
            continue
        return Command(head, _parse_args(head, COMMANDS[head], rest))
    return None
