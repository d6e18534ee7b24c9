"""Action plans: ordered task lists handed to external runners."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any

from .errors import PlanError

# CI pipeline tasks, in their canonical execution order.
CI_TASKS = (
    "cca",
    "format",
    "code-analysis",
    "data-validation",
    "refactor",
    "dependency-review",
    "build",
    "containerize",
    "test",
    "website-build",
    "changelog-update",
    "draft-update",
    "progress-track",
    "report",
)

ENGINE_TASKS = (
    # issue management
    "process-submission",
    "plan-issue-branches",
    "create-branch",
    "open-draft-pr",
    "changelog-bootstrap",
    "close-ticket",
    "protocol-append",
    "set-status",
    "assign",
    # integration and deployment
    "plan-merge",
    "dev-release",
    "tag",
    "changelog-finalize",
    "notes-render",
    # maintenance
    "dependency-refresh-check",
    "cleanup",
    "create-pr",
)

VOCABULARY = frozenset(CI_TASKS + ENGINE_TASKS)
_PUBLISH = re.compile(r"publish:[a-z0-9][a-z0-9-]*")


def is_known_task(task_id: str) -> bool:
    return task_id in VOCABULARY or bool(_PUBLISH.fullmatch(task_id))


@dataclass(frozen=True)
class TaskItem:
    id: str
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not is_known_task(self.id):
            raise PlanError(f"task {self.id!r} is not in the task vocabulary")

    def to_dict(self) -> dict:
        return {"id": self.id, "params": self.params}


@dataclass(frozen=True)
class ActionPlan:
    tasks: tuple[TaskItem, ...] = ()
    provenance: dict[str, Any] = field(default_factory=dict)

    @property
    def task_ids(self) -> list[str]:
        return [t.id for t in self.tasks]

    def to_dict(self) -> dict:
        return {"tasks": [t.to_dict() for t in self.tasks], "provenance": self.provenance}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def plan(*tasks: TaskItem | str, provenance: dict | None = None) -> ActionPlan:
    items = tuple(t if isinstance(t, TaskItem) else TaskItem(t) for t in tasks)
    return ActionPlan(items, provenance or {})
