from __future__ import annotations

import itertools
import logging

import pytest
from hypothesis import given
from hypothesis import strategies as st

from relforge.config.tree import ConfigTree
from relforge.errors import PlanError
from relforge.orchestrator import (
    EVENT_KINDS,
    PATH_CLASSES,
    Changeset,
    RepoEvent,
    classify_paths,
    dispatch,
    plan_cd,
    plan_ci,
)
from relforge.plans import TaskItem, is_known_task
from relforge.vcs import RepoState
from relforge.version import parse_version

from conftest import load_json, load_state
from oracles import ci_oracle

SUBSETS = [frozenset(s) for n in range(len(PATH_CLASSES) + 1) for s in itertools.combinations(PATH_CLASSES, n)]


def dev2_state() -> RepoState:
    state = RepoState.initial(["v1.0.0"]).with_branch("dev/2/main", "main")
    return state.with_tag("dev/2/main", parse_version("1.1.0a2.dev1"))


# -- events ----------------------------------------------------------------------


def test_unknown_kind():
    with pytest.raises(PlanError, match="unknown event kind"):
        RepoEvent("deployed", {})


def test_missing_payload_key():
    with pytest.raises(PlanError, match="source"):
        RepoEvent("merged", {"target": "main", "change_type": "minor"})


def test_push_needs_branch():
    with pytest.raises(PlanError, match="branch"):
        RepoEvent("commit_pushed", {"changes": ["a.py"]})


def test_event_round_trip():
    e = RepoEvent("commit_pushed", {"changes": ["a.py"]}, "dev/2/main")
    assert RepoEvent.from_dict(e.to_dict()) == e


# -- CI ---------------------------------------------------------------------------


def test_classify_paths(default_tree):
    assert classify_paths(["./.control/vcs.yaml"], default_tree) == {"config"}
    assert classify_paths(["src/a.py", "docs/x.md", "tests/t.py"], default_tree) == {"source", "docs", "tests"}


def test_config_only_change(default_tree):
    assert plan_ci(Changeset(frozenset({"config"})), default_tree) == [
        "cca", "data-validation", "changelog-update", "report"]


def test_empty_changeset(default_tree):
    assert plan_ci(Changeset(), default_tree) == ["report"]


def test_unknown_path_class():
    with pytest.raises(PlanError):
        Changeset(frozenset({"binaries"}))


@pytest.mark.parametrize("classes", SUBSETS, ids=lambda s: "+".join(sorted(s)) or "none")
@pytest.mark.parametrize("release", [False, True])
def test_ci_matches_oracle(default_tree, classes, release):
    expected = ci_oracle.expected(set(classes), release)
    assert plan_ci(Changeset(classes, release), default_tree) == expected
    assert plan_ci(Changeset(classes, release)) == expected


def test_ci_rejects_unknown_task():
    tree = ConfigTree.from_data({"workflows": {"ci": {"tasks": [{"id": "deploy-prod", "triggers": ["always"]}]}}})
    with pytest.raises(PlanError, match="vocabulary"):
        plan_ci(Changeset(frozenset({"source"})), tree)


# -- CD ------------------------------------------------------------------------------


def test_cd_final_release(default_tree):
    tasks = plan_cd({"version": "1.2.0", "branch": "main"}, default_tree)
    assert [t.id for t in tasks] == ["tag", "changelog-finalize", "notes-render", "publish:releases"]
    assert tasks[0].params["tag"] == "v1.2.0"


def test_cd_dev_release(default_tree):
    tasks = plan_cd({"version": "1.1.0a2.dev1", "branch": "dev/2/main"}, default_tree, dev=True)
    assert [t.id for t in tasks] == ["tag", "publish:testpypi"]


def test_cd_without_targets_warns(caplog):
    with caplog.at_level(logging.WARNING):
        tasks = plan_cd({"version": "1.2.0", "branch": "main"}, ConfigTree.from_data({}))
    assert [t.id for t in tasks] == ["tag", "changelog-finalize", "notes-render"]
    assert "no deployment targets" in caplog.text


def test_cd_needs_version(default_tree):
    with pytest.raises(PlanError, match="version"):
        plan_cd({"branch": "main"}, default_tree)


# -- dispatch ---------------------------------------------------------------------------


def test_issue_opened(default_tree):
    event = RepoEvent("issue_opened", load_json("bug_report.json"))
    plan = dispatch(event, load_state("main_v1.1.0.json"), default_tree)
    assert plan.task_ids == ["process-submission"]
    assert plan.tasks[0].params["ticket"]["labels"] == ["api/run", "type/bug", "version/1.1.0"]
    assert plan.provenance == event.to_dict()


def test_dev_push_with_source_change(default_tree):
    event = RepoEvent("commit_pushed", {"changes": ["src/relforge/reader.py"]}, "dev/2/main")
    plan = dispatch(event, dev2_state(), default_tree)
    assert plan.task_ids == ["cca", "format", "code-analysis", "data-validation", "refactor", "dependency-review",
                             "test", "changelog-update", "progress-track", "report"]


def test_dev_push_release(default_tree):
    event = RepoEvent("commit_pushed", {"changes": ["src/a.py"], "release": True, "change_type": "minor"},
                      "dev/2/main")
    plan = dispatch(event, dev2_state(), default_tree)
    assert plan.task_ids[-3:] == ["dev-release", "tag", "publish:testpypi"]
    assert plan.tasks[-2].params["tag"] == "v1.1.0a2.dev2"


def test_release_push_on_main_rejected(default_tree):
    event = RepoEvent("commit_pushed", {"changes": ["src/a.py"], "release": True}, "main")
    with pytest.raises(PlanError):
        dispatch(event, dev2_state(), default_tree)


def test_status_label_transition(default_tree):
    ticket = {"number": 2, "type": "feature", "title": "x", "affected_versions": ["1.1.0"]}
    event = RepoEvent("issue_labeled", {"ticket": ticket, "label": "status/ready"})
    plan = dispatch(event, load_state("main_v1.1.0.json"), default_tree)
    assert "create-branch" in plan.task_ids


def test_other_labels_ignored(default_tree):
    event = RepoEvent("issue_labeled", {"ticket": {"number": 2, "type": "bug", "title": "x"}, "label": "good-first"})
    assert dispatch(event, RepoState.initial(), default_tree).tasks == ()


def test_comment_command(default_tree):
    event = RepoEvent("comment_posted", {"issue": 2, "text": "/test version=1.1.0 env=linux"})
    (task,) = dispatch(event, RepoState.initial(), default_tree).tasks
    assert task == TaskItem("test", {"issue": 2, "version": "1.1.0", "env": "linux"})


def test_malformed_comment_command_reports(default_tree):
    event = RepoEvent("comment_posted", {"issue": 2, "text": "/test version=abc"})
    (task,) = dispatch(event, RepoState.initial(), default_tree).tasks
    assert task.id == "report" and "expected keys" in task.params["error"]


def test_merge_into_main(default_tree):
    state = load_state("main_v1.4.0.json")
    event = RepoEvent("merged", {"source": "dev/9/main", "target": "main", "change_type": "major"})
    plan = dispatch(event, state, default_tree)
    assert plan.task_ids == ["create-branch", "tag", "changelog-finalize", "notes-render", "publish:releases"]
    assert plan.tasks[0].params["name"] == "release-1"
    assert plan.tasks[1].params["tag"] == "v2.0.0"


def test_pr_approved_plans_merge(default_tree):
    event = RepoEvent("pr_approved", {"source": "dev/10/main", "target": "main", "change_type": "minor",
                                      "title": "Faster", "type": "feature"})
    (task,) = dispatch(event, load_state("main_v1.4.0.json"), default_tree).tasks
    assert task.id == "plan-merge" and task.params["version"] == "1.5.0" and task.params["strategy"] == "squash"


def test_scheduled(default_tree):
    plan = dispatch(RepoEvent("scheduled", {"run": "2025-w10"}), RepoState.initial(), default_tree)
    assert plan.task_ids == ["dependency-refresh-check", "cca", "refactor", "test", "cleanup", "create-pr"]
    assert plan.tasks[-1].params["head"] == "maint/2025-w10"


# -- vocabulary closure ---------------------------------------------------------------------


def test_task_vocabulary_is_closed():
    with pytest.raises(PlanError):
        TaskItem("rm-rf")
    assert is_known_task("publish:pypi") and not is_known_task("publish:")


@given(st.sampled_from(SUBSETS), st.booleans())
def test_ci_output_in_vocabulary(classes, release):
    assert all(is_known_task(t) for t in plan_ci(Changeset(classes, release)))


def test_every_event_kind_has_a_handler(default_tree):
    samples = {
        "issue_opened": RepoEvent("issue_opened", load_json("bug_report.json")),
        "issue_labeled": RepoEvent("issue_labeled", {"ticket": {"number": 1, "type": "bug", "title": "x"},
                                                     "label": "status/rejected"}),
        "comment_posted": RepoEvent("comment_posted", {"issue": 1, "text": "hi"}),
        "commit_pushed": RepoEvent("commit_pushed", {"changes": []}, "main"),
        "pr_approved": RepoEvent("pr_approved", {"source": "dev/10/main", "target": "main", "change_type": "minor"}),
        "merged": RepoEvent("merged", {"source": "dev/10/main", "target": "main", "change_type": "minor"}),
        "scheduled": RepoEvent("scheduled", {}),
    }
    assert set(samples) == set(EVENT_KINDS)
    state = load_state("main_v1.4.0.json")
    for event in samples.values():
        plan = dispatch(event, state, default_tree)
        assert all(is_known_task(t) for t in plan.task_ids)
