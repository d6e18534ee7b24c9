"""Replay event logs against a repository snapshot."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .config.tree import ConfigTree
from .errors import PlanError
from .orchestrator import RepoEvent, dispatch
from .plans import ActionPlan
from .vcs import RepoState
from .version import parse_tag


def _head(parent: str, salt: str) -> str:
    return hashlib.sha1(f"{parent}:{salt}".encode()).hexdigest()


def apply_plan(state: RepoState, plan: ActionPlan) -> tuple[RepoState, list[str]]:
    """Apply the repository-changing tasks of ``plan``; return the new state and new tags.

    Only branch creation, merge prerequisites, merges and tags touch the
    snapshot.  Every other task is an opaque instruction for external runners.
    """
    tags = []
    for task in plan.tasks:
        p = task.params
        if task.id == "create-branch":
            if p["name"] not in state.branches:
                state = state.with_branch(p["name"], p["source"])
        elif task.id == "plan-merge":
            for pre in p.get("prerequisites", ()):
                if pre["name"] not in state.branches:
                    state = state.with_branch(pre["name"], pre["source"])
            target = state.branch(p["target"])
            state = state.with_head(target.name, _head(target.head, p["commit_message"]))
        elif task.id == "tag":
            state = state.with_tag(p["branch"], parse_tag(p["tag"]))
            tags.append(p["tag"])
    return state, tags


@dataclass(frozen=True)
class ReplayResult:
    state: RepoState
    tags: tuple[str, ...]
    plans: tuple[ActionPlan, ...]

    def to_dict(self) -> dict:
        return {
            "state": self.state.to_dict(),
            "tags": list(self.tags),
            "plans": [p.to_dict() for p in self.plans],
        }


def replay(events: Iterable[RepoEvent], state: RepoState, tree: ConfigTree) -> ReplayResult:
    tags: list[str] = []
    plans = []
    for n, event in enumerate(events, 1):
        try:
            plan = dispatch(event, state, tree)
            state, new = apply_plan(state, plan)
        except PlanError as exc:
            raise PlanError(f"event {n} ({event.kind}): {exc}") from None
        plans.append(plan)
        tags.extend(new)
    return ReplayResult(state, tuple(tags), tuple(plans))


def read_event_log(path: str | Path) -> list[RepoEvent]:
    """JSON-lines event log; blank lines are skipped."""
    events = []
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise PlanError(f"{path}:{n}: {exc.msg}") from None
        events.append(RepoEvent.from_dict(doc))
    return events
