"""``${{ dotted.path }}`` substitution across the control center.

A marker that spans a whole scalar is replaced by the referenced value with
its type intact; markers embedded in longer text are stringified.
"""

from __future__ import annotations

import copy
import graphlib
import json
import re
from dataclasses import dataclass
from typing import Any

from ..errors import ConfigError, TemplateError
from .tree import ConfigNode, ConfigTree, PathT, format_path, parse_path

MARKER = re.compile(r"\$\{\{\s*([^{}]*?)\s*\}\}")


@dataclass(frozen=True)
class TemplateExpr:
    raw: str
    paths: frozenset[str]

    @classmethod
    def of(cls, raw: str) -> "TemplateExpr":
        return cls(raw, frozenset(m.group(1) for m in MARKER.finditer(raw)))

    @property
    def whole(self) -> str | None:
        """The referenced path when the marker spans the entire scalar."""
        m = MARKER.fullmatch(self.raw)
        return m.group(1) if m else None


def has_marker(value: Any) -> bool:
    return isinstance(value, str) and MARKER.search(value) is not None


def stringify(value: Any) -> str:
    if isinstance(value, str):
        return value
    return json.dumps(value, ensure_ascii=False)


def _prefix(a: PathT, b: PathT) -> bool:
    return len(a) <= len(b) and tuple(map(str, b[: len(a)])) == tuple(map(str, a))


def render_templates(tree: ConfigTree) -> ConfigTree:
    out = tree.copy()
    templated: dict[PathT, TemplateExpr] = {
        path: TemplateExpr.of(node.value)
        for path, node in out.root.walk()
        if node.kind == "string" and has_marker(node.value)
    }
    if not templated:
        return out

    refs: dict[PathT, list[tuple[str, PathT]]] = {}
    for path, expr in templated.items():
        origin = out.origin(path)
        parsed = []
        for ref in sorted(expr.paths):
            try:
                parsed.append((ref, parse_path(ref)))
            except ConfigError:
                raise TemplateError(f"{origin}: invalid reference {ref!r} in {format_path(path)}") from None
        refs[path] = parsed

    sorter: graphlib.TopologicalSorter = graphlib.TopologicalSorter()
    for path in sorted(templated, key=format_path):
        deps = set()
        for _, ref in refs[path]:
            for other in templated:
                # depends on templated nodes inside the referenced subtree and
                # on templated ancestors the reference passes through
                if _prefix(ref, other) or _prefix(other, ref):
                    deps.add(other)
        if path in deps:
            raise TemplateError(f"template cycle: {format_path(path)} refers to itself")
        sorter.add(path, *sorted(deps, key=format_path))
    try:
        order = list(sorter.static_order())
    except graphlib.CycleError as exc:
        cycle = " -> ".join(format_path(p) for p in exc.args[1])
        raise TemplateError(f"template cycle: {cycle}") from None

    for path in order:
        if path not in templated:
            continue
        expr = templated[path]
        origin = out.origin(path)

        def lookup(ref_text: str, ref: PathT) -> ConfigNode:
            node = out.node(ref)
            if node is None:
                raise TemplateError(
                    f"{origin}: {format_path(path)} refers to nonexistent path {ref_text!r}"
                )
            return node

        whole = expr.whole
        if whole is not None:
            target = copy.deepcopy(lookup(whole, parse_path(whole)))
            target.origin = origin
            out.set(path, target)
        else:
            text = MARKER.sub(lambda m: stringify(lookup(m.group(1), parse_path(m.group(1))).to_data()), expr.raw)
            out.set(path, ConfigNode("string", text, origin))
    return out
