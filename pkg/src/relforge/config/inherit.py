"""Inherit control-center sections from external documents.

Directives live under the top-level ``inherit`` key::

    inherit:
      - source: https://example.org/shared.yaml
        path: license          # section of the fetched document (default: whole)
        target: license        # where it lands locally ("" is the root)
        policy: deep-merge     # replace | deep-merge | fill-missing
        retention: 3600        # optional cache retention in seconds

``replace`` discards the local value.  ``deep-merge`` merges mappings
recursively with the inherited value winning on conflicts; ``fill-missing``
does the same but keeps local values.  Sequences and scalars are never merged
element-wise.
"""

from __future__ import annotations

import copy
import logging
import urllib.parse
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from ..errors import ConfigError, InheritanceError
from ..report import Origin
from .cache import CacheStore, cache_key, cache_lookup
from .tree import ConfigNode, ConfigTree, format_path, parse_document, parse_path

log = logging.getLogger(__name__)

Fetcher = Callable[[str], str]

POLICIES = ("replace", "deep-merge", "fill-missing")
DIRECTIVE_KEY = "inherit"
MAX_DEPTH = 10


@dataclass(frozen=True)
class InheritanceDirective:
    source: str
    source_path: str
    target: str
    policy: str = "deep-merge"
    retention: float | None = None
    origin: Origin | None = None

    @property
    def key(self) -> str:
        return cache_key(self.source, self.source_path)


def read_directives(tree: ConfigTree) -> list[InheritanceDirective]:
    node = tree.node(DIRECTIVE_KEY)
    if node is None:
        return []
    items = node.value if node.kind == "sequence" else [node]
    out = []
    for item in items:
        where = item.origin
        if item.kind != "mapping":
            raise InheritanceError(f"{where}: inheritance directive must be a mapping")
        data = item.to_data()
        unknown = set(data) - {"source", "path", "target", "policy", "retention"}
        if unknown:
            raise InheritanceError(f"{where}: unknown directive keys {sorted(unknown)}")
        source = data.get("source")
        if not isinstance(source, str) or not source.strip():
            raise InheritanceError(f"{where}: directive needs a 'source'")
        target = data.get("target", "")
        src_path = data.get("path", "")
        policy = data.get("policy", "deep-merge")
        if policy not in POLICIES:
            raise InheritanceError(f"{where}: policy {policy!r} is not one of {'|'.join(POLICIES)}")
        try:
            parse_path(str(target))
            parse_path(str(src_path))
        except ConfigError as exc:
            raise InheritanceError(f"{where}: {exc}") from None
        retention = data.get("retention")
        if retention is not None and (isinstance(retention, bool) or not isinstance(retention, (int, float))):
            raise InheritanceError(f"{where}: retention must be a number of seconds")
        out.append(InheritanceDirective(source, str(src_path), str(target), policy, retention, where))
    return out


def merge_nodes(local: ConfigNode, incoming: ConfigNode, prefer_incoming: bool) -> ConfigNode:
    if local.kind == "mapping" and incoming.kind == "mapping":
        merged = dict(local.value)
        for key, node in incoming.value.items():
            merged[key] = merge_nodes(local.value[key], node, prefer_incoming) if key in local.value else node
        return ConfigNode("mapping", merged, local.origin)
    return incoming if prefer_incoming else local


def apply_policy(tree: ConfigTree, target: str, incoming: ConfigNode, policy: str) -> None:
    incoming = copy.deepcopy(incoming)
    local = tree.node(target)
    if local is None or policy == "replace":
        tree.set(target, incoming)
    else:
        tree.set(target, merge_nodes(local, incoming, prefer_incoming=(policy == "deep-merge")))


def _obtain(d: InheritanceDirective, fetcher: Fetcher | None, cache: CacheStore | None, now: float) -> str:
    stale = False
    if cache is not None:
        found = cache_lookup(cache, d.key, now)
        if found.status == "hit":
            return found.payload
        stale = found.status == "stale"
    if fetcher is None:
        state = "stale cache entry" if stale else "no cache entry"
        raise InheritanceError(f"cannot fetch {d.source}: no fetcher available and {state} (no usable cache)")
    try:
        text = fetcher(d.source)
    except Exception as exc:
        raise InheritanceError(f"fetch of {d.source} failed ({exc}) and no usable cache") from exc
    if cache is not None:
        cache.write(d.key, text, now, d.retention)
    return text


def _resolve(tree: ConfigTree, fetcher, cache, now: float, chain: tuple[str, ...], max_depth: int) -> None:
    directives = read_directives(tree)
    tree.delete(DIRECTIVE_KEY)
    for d in directives:
        if d.key in chain:
            raise InheritanceError("inheritance cycle: " + " -> ".join(chain + (d.key,)))
        if len(chain) >= max_depth:
            raise InheritanceError(f"inheritance depth limit {max_depth} exceeded at {d.key}")
        doc = parse_document(_obtain(d, fetcher, cache, now), d.source)
        if doc is None:
            doc = ConfigNode("mapping", {}, Origin(d.source, 1))
        if doc.kind != "mapping":
            raise InheritanceError(f"{d.source}: inherited document must be a mapping")
        fetched = ConfigTree(doc)
        _resolve(fetched, fetcher, cache, now, chain + (d.key,), max_depth)
        section = fetched.node(d.source_path)
        if section is None:
            raise InheritanceError(f"{d.source}: path {d.source_path!r} not found")
        try:
            apply_policy(tree, d.target, section, d.policy)
        except ConfigError as exc:
            raise InheritanceError(f"{d.origin}: cannot merge into {format_path(parse_path(d.target)) or '<root>'}: {exc}") from None


def resolve_inheritance(
    tree: ConfigTree,
    fetcher: Fetcher | None = None,
    cache: CacheStore | None = None,
    now: float = 0.0,
    *,
    max_depth: int = MAX_DEPTH,
) -> ConfigTree:
    """Fetch, merge and strip every inheritance directive, recursively."""
    out = tree.copy()
    _resolve(out, fetcher, cache, now, (), max_depth)
    return out


def default_fetcher(base: str | Path = ".", timeout: float = 10.0) -> Fetcher:
    """Fetch local paths (relative to ``base``), ``file://`` and ``http(s)://`` URIs."""
    base = Path(base)

    def fetch(source: str) -> str:
        parsed = urllib.parse.urlparse(source)
        if parsed.scheme in ("http", "https"):
            with urllib.request.urlopen(source, timeout=timeout) as resp:
                return resp.read().decode("utf-8")
        if parsed.scheme == "file":
            return Path(urllib.parse.unquote(parsed.path)).read_text(encoding="utf-8")
        if parsed.scheme in ("", None):
            return (base / source).read_text(encoding="utf-8")
        raise InheritanceError(f"unsupported source scheme {parsed.scheme!r}")

    return fetch
