"""Load, resolve, render, augment, validate and synchronize a control center."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

from ..errors import ConfigError
from ..report import ValidationReport
from .augment import AugmentationProvider, augment, default_providers
from .cache import CacheStore
from .generators import default_generators
from .inherit import Fetcher, resolve_inheritance
from .schema import SchemaSet, validate
from .sync import FileGenerator, SyncReport, synchronize
from .templating import render_templates
from .tree import ConfigTree, load_tree

if TYPE_CHECKING:
    from ..vcs import RepoState


@dataclass(frozen=True)
class BuildResult:
    tree: ConfigTree
    report: ValidationReport


def build_tree(
    control_dir: str | Path,
    *,
    fetcher: Fetcher | None = None,
    cache: CacheStore | None = None,
    now: float = 0.0,
    state: "RepoState | None" = None,
    providers: list[AugmentationProvider] | None = None,
    schemas: SchemaSet | None = None,
) -> BuildResult:
    tree = load_tree(control_dir)
    tree = resolve_inheritance(tree, fetcher, cache, now)
    tree = render_templates(tree)
    tree = augment(tree, default_providers() if providers is None else providers, state)
    return BuildResult(tree, validate(tree, schemas))


def run_sync(
    control_dir: str | Path,
    workspace: str | Path,
    *,
    generators: list[FileGenerator] | None = None,
    **options,
) -> tuple[SyncReport, ValidationReport]:
    """Build the tree and write the generated files; refuses to sync an invalid tree."""
    built = build_tree(control_dir, **options)
    if built.report.errors:
        first = built.report.errors[0]
        raise ConfigError(f"control center has {len(built.report.errors)} validation error(s); first: {first}")
    sync = synchronize(built.tree, default_generators() if generators is None else generators, workspace)
    return sync, built.report
