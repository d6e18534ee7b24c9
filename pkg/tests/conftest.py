from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import pytest

from relforge.config.pipeline import build_tree
from relforge.vcs import RepoState

FIXTURES = Path(__file__).parent / "fixtures"
CONTROL = Path(str(resources.files("relforge") / "data" / "control"))


def load_state(name: str) -> RepoState:
    return RepoState.from_dict(json.loads((FIXTURES / name).read_text()))


def load_json(name: str):
    return json.loads((FIXTURES / name).read_text())


@pytest.fixture(scope="session")
def control_dir() -> Path:
    return CONTROL


@pytest.fixture(scope="session")
def default_tree():
    built = build_tree(CONTROL)
    assert built.report.ok, built.report.to_dict()
    return built.tree


@pytest.fixture
def tree(default_tree):
    return default_tree.copy()


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
