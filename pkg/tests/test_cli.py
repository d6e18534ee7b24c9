from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from relforge import GENERATED_HEADER, __version__
from relforge.cli import main

from conftest import CONTROL, FIXTURES


@pytest.fixture
def run():
    runner = CliRunner()

    def invoke(*args, **kwargs):
        return runner.invoke(main, [str(a) for a in args], catch_exceptions=False, **kwargs)

    return invoke


def test_version_flag(run):
    assert __version__ in run("--version").output


def test_version_parse_json(run):
    res = run("version", "parse", "1.1.0rc1.post2", "--json")
    assert res.exit_code == 0
    assert json.loads(res.output) == {"version": "1.1.0rc1.post2", "release": [1, 1, 0],
                                      "pre": {"phase": "rc", "number": 1}, "post": 2, "dev": None}


def test_version_parse_error(run):
    res = run("version", "parse", "1.1")
    assert res.exit_code == 1 and "error:" in res.output


def test_version_next(run):
    res = run("version", "next", "--state", FIXTURES / "main_v1.0.0.json", "--issue", 2, "--type", "minor")
    assert res.output.strip() == "1.1.0a2.dev1"


def test_version_finalize(run):
    res = run("version", "finalize", "--state", FIXTURES / "main_v1.4.0.json", "--issue", 9, "--type", "major")
    assert res.output.strip() == "2.0.0"


def test_validate_bundled_control(run):
    res = run("validate", "--control", CONTROL)
    assert res.exit_code == 0


def test_sync_twice(run, tmp_path):
    first = run("sync", "--control", CONTROL, "--workspace", tmp_path, "--json")
    assert first.exit_code == 0
    assert json.loads(first.output)["created"]
    assert GENERATED_HEADER in (tmp_path / "README.md").read_text()
    second = run("sync", "--control", CONTROL, "--workspace", tmp_path, "--json")
    doc = json.loads(second.output)
    assert doc["created"] == [] and doc["updated"] == []


def test_compile_forms_writes_files(run, tmp_path):
    res = run("issue", "compile-forms", "--control", CONTROL, "--out", tmp_path)
    assert res.exit_code == 0
    assert (tmp_path / ".github/ISSUE_TEMPLATE/bug-report.yaml").exists()


def test_issue_process(run, tmp_path):
    out = tmp_path / "protocol.md"
    res = run("issue", "process", "--form", "bug-report", "--payload", FIXTURES / "bug_report.json",
              "--state", FIXTURES / "main_v1.1.0.json", "--control", CONTROL, "--protocol-out", out, "--json")
    assert res.exit_code == 0
    assert json.loads(res.output)["ticket"]["labels"] == ["api/run", "type/bug", "version/1.1.0"]
    assert "User Requirements Document (URD)" in out.read_text()


def test_issue_transition(run, tmp_path):
    ticket = tmp_path / "ticket.json"
    ticket.write_text(json.dumps({"number": 3, "type": "bug", "title": "x", "affected_versions": ["1.1.0"]}))
    res = run("issue", "transition", "--ticket", ticket, "--label", "status/ready",
              "--state", FIXTURES / "main_v1.1.0.json", "--control", CONTROL)
    assert res.exit_code == 0 and "create-branch" in res.output.split()


def test_changelog_append_and_render(run, tmp_path):
    entry = tmp_path / "entry.json"
    entry.write_text(json.dumps({
        "id": "1.1.0-3f2a9c1b7d4e", "issue": 2, "pr": 10, "type": "minor", "title": "Add reader",
        "description": "d", "contributors": ["alice"], "version": "1.1.0",
        "commit": "3f2a9c1b7d4e5f60718293a4b5c6d7e8f9012345", "date": "2025-03-02T10:00:00Z",
    }))
    ledger = tmp_path / "changelog.json"
    assert run("changelog", "append", "--ledger", ledger, "--entry", entry).exit_code == 0
    dup = run("changelog", "append", "--ledger", ledger, "--entry", entry)
    assert dup.exit_code == 1 and "duplicate" in dup.output
    res = run("changelog", "render", "--ledger", ledger, "--control", CONTROL)
    assert "- Add reader (#2, PR #10)" in res.output


def test_license_commands(run, tmp_path):
    tree = json.loads(run("license", "parse", "MIT OR Apache-2.0", "--json").output)
    assert [c["license"] for c in tree["tree"]["or"]] == ["MIT", "Apache-2.0"]
    bad = run("license", "validate", "MIT OR BogusId")
    assert bad.exit_code == 1 and "unknown id BogusId" in bad.output
    src = tmp_path / "a.py"
    src.write_text("#!/usr/bin/env python3\nprint(1)\n")
    run("license", "apply", "--expr", "MIT", src)
    assert src.read_text().splitlines()[1] == "# SPDX-License-Identifier: MIT"
    assert "nothing to do" in run("license", "apply", "--expr", "MIT", src).output


def test_dispatch_event(run, tmp_path):
    event = tmp_path / "event.json"
    event.write_text(json.dumps({"kind": "scheduled", "payload": {"run": "w1"}}))
    res = run("dispatch", "--event", event, "--state", FIXTURES / "main_v1.0.0.json", "--control", CONTROL)
    assert res.output.split()[0] == "dependency-refresh-check"


def test_dispatch_replay(run, tmp_path):
    out = tmp_path / "state.json"
    res = run("dispatch", "--replay", FIXTURES / "concurrent_minor_releases.jsonl",
              "--state", FIXTURES / "main_v1.0.0.json", "--control", CONTROL, "--state-out", out)
    assert res.output.split()[-1] == "v1.2.0"
    assert json.loads(out.read_text())["branches"]


def test_dispatch_needs_one_source(run):
    res = run("dispatch", "--state", FIXTURES / "main_v1.0.0.json")
    assert res.exit_code == 2
