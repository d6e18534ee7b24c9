"""Exception hierarchy shared by all engines."""

from __future__ import annotations


class RelforgeError(Exception):
    """Base class for every error raised by relforge."""


class ConfigError(RelforgeError):
    """Control-center document could not be loaded or merged."""


class InheritanceError(ConfigError):
    pass


class TemplateError(ConfigError):
    pass


class AugmentError(ConfigError):
    pass


class SyncError(ConfigError):
    pass


class VersionError(RelforgeError):
    """Invalid version text or an impossible version computation."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message if position is None else f"{message} (at offset {position})")
        self.position = position


class PlanError(RelforgeError):
    """A branch, merge or dispatch plan cannot be produced."""


class IssueError(RelforgeError):
    pass


class CommandError(IssueError):
    """A known command verb was posted with malformed arguments."""

    def __init__(self, verb: str, message: str, expected: list[str]):
        super().__init__(f"/{verb}: {message}; expected keys: {', '.join(expected)}")
        self.verb = verb
        self.expected = expected


class LedgerError(RelforgeError):
    pass


class LicenseError(RelforgeError):
    pass


class LicenseParseError(LicenseError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position
