"""CI filter table transcribed by hand, independent of the control-center data."""

ORDER = [
    "cca", "format", "code-analysis", "data-validation", "refactor", "dependency-review", "build",
    "containerize", "test", "website-build", "changelog-update", "draft-update", "progress-track", "report",
]
BY_CLASS = {
    "config": {"cca", "data-validation", "changelog-update", "draft-update"},
    "source": {"cca", "format", "code-analysis", "data-validation", "refactor", "dependency-review", "build",
               "containerize", "test", "website-build", "changelog-update", "draft-update", "progress-track"},
    "docs": {"website-build", "changelog-update", "draft-update", "progress-track"},
    "tests": {"format", "code-analysis", "refactor", "test", "changelog-update", "progress-track"},
}
RELEASE_ONLY = {"build", "containerize", "website-build", "draft-update"}


def expected(classes: set[str], release: bool) -> list[str]:
    if not classes:
        return ["report"]
    wanted = set().union(*(BY_CLASS[c] for c in classes)) | {"report"}
    if not release:
        wanted -= RELEASE_ONLY
    return [t for t in ORDER if t in wanted]
