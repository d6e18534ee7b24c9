"""Validate a control-center tree against the bundled JSON Schemas."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import jsonschema

from ..report import Finding, ValidationReport
from .tree import ConfigTree, format_path

# One schema per control-center category.
CATEGORIES = ("descriptors", "metadata", "package", "documentation", "issues", "vcs", "workflows")

SchemaSet = dict[str, dict]


def load_schemas(directory: str | Path | None = None) -> SchemaSet:
    if directory is None:
        root = resources.files("relforge") / "data" / "schemas"
        files = {p.name: p for p in root.iterdir() if p.name.endswith(".json")}
    else:
        files = {p.name: p for p in Path(directory).glob("*.json")}
    schemas = {}
    for name in sorted(files):
        schema = json.loads(files[name].read_text(encoding="utf-8"))
        jsonschema.Draft202012Validator.check_schema(schema)
        schemas[name[: -len(".json")]] = schema
    return schemas


def _message(error: jsonschema.ValidationError) -> str:
    if error.validator == "enum":
        return f"{error.instance!r} is not one of {'|'.join(str(v) for v in error.validator_value)}"
    if error.validator == "const":
        return f"{error.instance!r} must be {error.validator_value!r}"
    return error.message


def validate(tree: ConfigTree, schemas: SchemaSet | None = None) -> ValidationReport:
    if schemas is None:
        schemas = load_schemas()
    data = tree.to_data()
    findings = set()
    for name in sorted(schemas):
        validator = jsonschema.Draft202012Validator(schemas[name])
        for error in validator.iter_errors(data):
            path = tuple(error.absolute_path)
            findings.add(Finding("error", format_path(path), _message(error), tree.origin(path)))
    return ValidationReport.of(findings)
