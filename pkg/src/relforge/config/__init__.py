"""Control-center configuration engine.

The generator and pipeline modules depend on the other engines and are
imported from their own submodules (``relforge.config.pipeline``).
"""

from __future__ import annotations

from .augment import AugmentationProvider, augment, default_providers
from .cache import CacheStore, cache_key, cache_lookup
from .inherit import InheritanceDirective, default_fetcher, resolve_inheritance
from .schema import load_schemas, validate
from .sync import FileGenerator, SyncReport, synchronize
from .templating import render_templates
from .tree import ConfigNode, ConfigTree, load_tree, parse_path

__all__ = [
    "AugmentationProvider",
    "CacheStore",
    "ConfigNode",
    "ConfigTree",
    "FileGenerator",
    "InheritanceDirective",
    "SyncReport",
    "augment",
    "cache_key",
    "cache_lookup",
    "default_fetcher",
    "default_providers",
    "load_schemas",
    "load_tree",
    "parse_path",
    "render_templates",
    "resolve_inheritance",
    "synchronize",
    "validate",
]
