"""Fill control-center gaps with data derived from the repository.

Providers are pure functions of ``(tree, repo_state)``.  Each declares the
paths it fills; values only land where the user tree has nothing, so
user-supplied data always wins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Callable, Mapping

from ..errors import AugmentError
from ..report import Origin
from .tree import ConfigNode, ConfigTree, format_path, parse_path

if TYPE_CHECKING:
    from ..vcs import RepoState


@dataclass(frozen=True)
class AugmentationProvider:
    name: str
    fills: tuple[str, ...]
    compute: Callable[[ConfigTree, "RepoState | None"], Mapping[str, Any]]


def augment(tree: ConfigTree, providers: list[AugmentationProvider], state: "RepoState | None" = None) -> ConfigTree:
    out = tree.copy()
    for provider in providers:
        declared = {format_path(parse_path(p)) for p in provider.fills}
        produced = provider.compute(out.copy(), state) or {}
        for raw_path in sorted(produced):
            path = format_path(parse_path(raw_path))
            if path not in declared:
                if out.has(path):
                    raise AugmentError(f"provider {provider.name!r} attempted to overwrite existing path {path!r}")
                raise AugmentError(f"provider {provider.name!r} wrote undeclared path {path!r}")
            if out.has(path):
                continue
            out.set(path, ConfigNode.from_data(produced[raw_path], Origin(f"<augment:{provider.name}>", 0)))
    return out


def _contributors(tree: ConfigTree, state: "RepoState | None") -> dict[str, Any]:
    if state is None:
        return {}
    return {"team.contributors": sorted(set(state.authors))}


def _released_versions(tree: ConfigTree, state: "RepoState | None") -> dict[str, Any]:
    if state is None:
        return {}
    from ..version import format_version

    finals = state.final_versions()
    return {"vcs.released_versions": [format_version(v) for v in sorted(finals, reverse=True)]}


CONTRIBUTOR_LIST = AugmentationProvider("contributor-list", ("team.contributors",), _contributors)
RELEASED_VERSIONS = AugmentationProvider("released-versions", ("vcs.released_versions",), _released_versions)


def default_providers() -> list[AugmentationProvider]:
    return [CONTRIBUTOR_LIST, RELEASED_VERSIONS]
