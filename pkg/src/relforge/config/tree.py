"""Control-center document model: a tree of nodes that remember their origin."""

from __future__ import annotations

import copy
import datetime as _dt
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterator, Union

import yaml

from ..errors import ConfigError
from ..report import Origin

Segment = Union[str, int]
PathT = tuple[Segment, ...]

KINDS = ("mapping", "sequence", "string", "integer", "float", "boolean", "null")
CONTROL_SUFFIXES = (".yaml", ".yml")

_SEGMENT = re.compile(r"^[A-Za-z0-9_\-]+$")
_MISSING = object()


def parse_path(text: str | PathT) -> PathT:
    """Split a dotted path into segments; all-digit segments become indices.

    The empty string addresses the root.
    """
    if isinstance(text, tuple):
        return text
    text = text.strip()
    if not text:
        return ()
    parts: list[Segment] = []
    for seg in text.split("."):
        if not _SEGMENT.match(seg):
            raise ConfigError(f"invalid path {text!r}: bad segment {seg!r}")
        parts.append(int(seg) if seg.isdigit() else seg)
    return tuple(parts)


def format_path(path: PathT) -> str:
    return ".".join(str(p) for p in path)


def _kind_of(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "integer"
    if isinstance(value, float):
        return "float"
    if isinstance(value, str):
        return "string"
    if isinstance(value, dict):
        return "mapping"
    if isinstance(value, (list, tuple)):
        return "sequence"
    raise ConfigError(f"unsupported value type {type(value).__name__}")


@dataclass
class ConfigNode:
    kind: str
    value: Any
    origin: Origin

    @classmethod
    def from_data(cls, data: Any, origin: Origin) -> "ConfigNode":
        kind = _kind_of(data)
        if kind == "mapping":
            return cls(kind, {str(k): cls.from_data(v, origin) for k, v in data.items()}, origin)
        if kind == "sequence":
            return cls(kind, [cls.from_data(v, origin) for v in data], origin)
        return cls(kind, data, origin)

    @property
    def is_container(self) -> bool:
        return self.kind in ("mapping", "sequence")

    def to_data(self) -> Any:
        if self.kind == "mapping":
            return {k: v.to_data() for k, v in self.value.items()}
        if self.kind == "sequence":
            return [v.to_data() for v in self.value]
        return self.value

    def child(self, seg: Segment) -> "ConfigNode | None":
        if self.kind == "mapping":
            return self.value.get(str(seg))
        if self.kind == "sequence":
            if isinstance(seg, str):
                if not seg.isdigit():
                    return None
                seg = int(seg)
            if 0 <= seg < len(self.value):
                return self.value[seg]
        return None

    def walk(self, path: PathT = ()) -> Iterator[tuple[PathT, "ConfigNode"]]:
        yield path, self
        if self.kind == "mapping":
            for k, v in self.value.items():
                yield from v.walk(path + (k,))
        elif self.kind == "sequence":
            for i, v in enumerate(self.value):
                yield from v.walk(path + (i,))


class ConfigTree:
    """The resolved control center.  Operations return new trees."""

    def __init__(self, root: ConfigNode):
        if root.kind != "mapping":
            raise ConfigError(f"control-center root must be a mapping, got {root.kind}")
        self.root = root

    @classmethod
    def from_data(cls, data: dict, file: str = "<memory>") -> "ConfigTree":
        return cls(ConfigNode.from_data(data, Origin(file, 1)))

    def copy(self) -> "ConfigTree":
        return ConfigTree(copy.deepcopy(self.root))

    def to_data(self) -> dict:
        return self.root.to_data()

    @property
    def provenance(self) -> dict[str, Origin]:
        return {format_path(p): n.origin for p, n in self.root.walk()}

    def node(self, path: str | PathT) -> ConfigNode | None:
        cur: ConfigNode | None = self.root
        for seg in parse_path(path):
            if cur is None:
                return None
            cur = cur.child(seg)
        return cur

    def has(self, path: str | PathT) -> bool:
        return self.node(path) is not None

    def get(self, path: str | PathT, default: Any = _MISSING) -> Any:
        n = self.node(path)
        if n is None:
            if default is _MISSING:
                raise KeyError(format_path(parse_path(path)))
            return default
        return n.to_data()

    def origin(self, path: str | PathT) -> Origin:
        """Origin of the node at ``path`` or of its nearest existing ancestor."""
        cur = self.root
        for seg in parse_path(path):
            nxt = cur.child(seg)
            if nxt is None:
                break
            cur = nxt
        return cur.origin

    def set(self, path: str | PathT, node: ConfigNode) -> None:
        """Place ``node`` at ``path``, creating intermediate mappings."""
        segs = parse_path(path)
        if not segs:
            if node.kind != "mapping":
                raise ConfigError("cannot replace the root with a non-mapping value")
            self.root = node
            return
        cur = self.root
        for seg in segs[:-1]:
            nxt = cur.child(seg)
            if nxt is None:
                if cur.kind != "mapping":
                    raise ConfigError(f"cannot create {format_path(segs)}: parent is a {cur.kind}")
                nxt = ConfigNode("mapping", {}, node.origin)
                cur.value[str(seg)] = nxt
            cur = nxt
        last = segs[-1]
        if cur.kind == "mapping":
            cur.value[str(last)] = node
        elif cur.kind == "sequence" and cur.child(last) is not None:
            cur.value[int(last)] = node
        else:
            raise ConfigError(f"cannot set {format_path(segs)}: parent is a {cur.kind}")

    def delete(self, path: str | PathT) -> None:
        segs = parse_path(path)
        parent = self.node(segs[:-1])
        if parent is None or parent.child(segs[-1]) is None:
            return
        if parent.kind == "mapping":
            del parent.value[str(segs[-1])]
        else:
            del parent.value[int(segs[-1])]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ConfigTree) and self.to_data() == other.to_data()

    def __repr__(self) -> str:
        return f"ConfigTree({self.to_data()!r})"


# -- YAML loading ---------------------------------------------------------


def _convert(loader: yaml.SafeLoader, node: yaml.Node, file: str, stack: tuple[int, ...]) -> ConfigNode:
    origin = Origin(file, node.start_mark.line + 1)
    if id(node) in stack:
        raise ConfigError(f"{origin}: recursive alias")
    stack = stack + (id(node),)
    if isinstance(node, yaml.MappingNode):
        loader.flatten_mapping(node)
        out: dict[str, ConfigNode] = {}
        for key_node, value_node in node.value:
            key = loader.construct_object(key_node)
            if isinstance(key, (dict, list)) or key is None:
                raise ConfigError(f"{file}:{key_node.start_mark.line + 1}: mapping keys must be scalars")
            key = str(key).lower() if isinstance(key, bool) else str(key)
            if key in out:
                raise ConfigError(
                    f"{file}:{key_node.start_mark.line + 1}: duplicate key {key!r} "
                    f"(first defined at line {out[key].origin.line})"
                )
            out[key] = _convert(loader, value_node, file, stack)
        return ConfigNode("mapping", out, origin)
    if isinstance(node, yaml.SequenceNode):
        return ConfigNode("sequence", [_convert(loader, v, file, stack) for v in node.value], origin)
    value = loader.construct_object(node)
    if isinstance(value, (_dt.date, _dt.datetime)):
        value = value.isoformat()
    elif isinstance(value, bytes):
        value = value.decode("utf-8", "replace")
    return ConfigNode(_kind_of(value), value, origin)


def parse_document(text: str, file: str) -> ConfigNode | None:
    """Parse one YAML (or JSON) document into nodes; ``None`` for an empty one."""
    loader = yaml.SafeLoader(text)
    try:
        root = loader.get_single_node()
        if root is None:
            return None
        return _convert(loader, root, file, ())
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark else 0
        raise ConfigError(f"{file}:{line}: cannot parse document: {exc.problem or exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{file}: cannot parse document: {exc}") from exc
    finally:
        loader.dispose()


def load_tree(directory: str | Path) -> ConfigTree:
    """Merge every control-center document in ``directory`` into one tree.

    Files are read in name order.  Top-level keys must be unique across files.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ConfigError(f"control-center directory {directory} does not exist")
    files = sorted(p for p in directory.iterdir() if p.is_file() and p.suffix in CONTROL_SUFFIXES)
    if not files:
        raise ConfigError(f"no control-center documents in {directory}")

    merged: dict[str, ConfigNode] = {}
    for path in files:
        doc = parse_document(path.read_text(encoding="utf-8"), str(path))
        if doc is None:
            continue
        if doc.kind != "mapping":
            raise ConfigError(f"{path}:{doc.origin.line}: top level must be a mapping")
        for key, node in doc.value.items():
            if key in merged:
                raise ConfigError(
                    f"duplicate key {key!r} defined in {merged[key].origin} and {node.origin}"
                )
            merged[key] = node
    return ConfigTree(ConfigNode("mapping", merged, Origin(str(files[0]), 1)))
