"""Validate expressions, render license documents and annotate source files."""

from __future__ import annotations

import re
from typing import Mapping

from ..errors import LicenseError
from ..report import Finding, ValidationReport
from .expr import And, LicenseExpr, LicenseId, Or, WithException, exception_ids, license_ids, parse_license_expr
from .registry import LicenseRecord, LicenseRegistry

PLACEHOLDER = re.compile(r"<<\s*([A-Za-z0-9_]+)\s*>>")
IDENTIFIER_TAG = "SPDX-License-Identifier:"


def _as_expr(expr: LicenseExpr | str) -> LicenseExpr:
    return parse_license_expr(expr) if isinstance(expr, str) else expr


def validate_license_expr(expr: LicenseExpr | str, registry: LicenseRegistry) -> ValidationReport:
    expr = _as_expr(expr)
    findings = []
    for lic in license_ids(expr):
        rec = registry.license(lic.id)
        if rec is None:
            findings.append(Finding("error", "license", f"unknown id {lic.id}"))
        elif rec.deprecated:
            findings.append(Finding("warning", "license", f"deprecated id {rec.id}"))
    for exc_id in exception_ids(expr):
        rec = registry.exception(exc_id)
        if rec is None:
            findings.append(Finding("error", "license", f"unknown exception id {exc_id}"))
        elif rec.deprecated:
            findings.append(Finding("warning", "license", f"deprecated exception id {rec.id}"))
    return ValidationReport.of(dict.fromkeys(findings))


def _allowed(expr: LicenseExpr, allowed: set[str]) -> bool:
    if isinstance(expr, LicenseId):
        return expr.id.lower() in allowed
    if isinstance(expr, WithException):
        return expr.license.id.lower() in allowed
    if isinstance(expr, Or):
        return _allowed(expr.left, allowed) or _allowed(expr.right, allowed)
    return _allowed(expr.left, allowed) and _allowed(expr.right, allowed)


def check_compatibility(
    project: LicenseExpr | str,
    dependencies: Mapping[str, str],
    matrix: Mapping[str, list[str]],
) -> ValidationReport:
    """Look dependency licenses up in a user-supplied compatibility matrix.

    ``matrix`` maps a project license id to the dependency license ids it may
    use.  An OR alternative is enough; AND needs every side allowed.
    """
    project = _as_expr(project)
    table = {k.lower(): {v.lower() for v in vs} for k, vs in matrix.items()}
    findings = []
    allowed: set[str] | None = None
    for lic in license_ids(project):
        if lic.id.lower() not in table:
            findings.append(Finding("warning", "license", f"no compatibility data for {lic.id}"))
            continue
        ok = table[lic.id.lower()]
        allowed = ok if allowed is None else allowed & ok
    if allowed is not None:
        for name in sorted(dependencies):
            dep = _as_expr(dependencies[name])
            if not _allowed(dep, allowed):
                findings.append(Finding("error", f"dependencies.{name}", f"license {dep} conflicts with {project}"))
    return ValidationReport.of(findings)


def customize_license_text(record: LicenseRecord, fields: Mapping[str, object]) -> str:
    text = record.full_text()
    missing = sorted({m.group(1) for m in PLACEHOLDER.finditer(text)} - set(fields))
    if missing:
        raise LicenseError(f"{record.id}: no value for placeholder {', '.join(missing)}")
    return PLACEHOLDER.sub(lambda m: str(fields[m.group(1)]), text)


def generate_license_docs(
    expr: LicenseExpr | str, registry: LicenseRegistry, fields: Mapping[str, object]
) -> list[tuple[str, str]]:
    expr = _as_expr(expr)
    report = validate_license_expr(expr, registry)
    if report.errors:
        raise LicenseError("; ".join(f.message for f in report.errors))

    if isinstance(expr, LicenseId):
        return [("LICENSE", customize_license_text(registry.license(expr.id), fields))]

    files: dict[str, str] = {}
    listing = []
    for lic in license_ids(expr):
        rec = registry.license(lic.id)
        path = f"LICENSES/{rec.id}.txt"
        if path not in files:
            files[path] = customize_license_text(rec, fields)
            listing.append(f"- `{path}`: {rec.name}")
    for exc_id in exception_ids(expr):
        rec = registry.exception(exc_id)
        path = f"LICENSES/{rec.id}.txt"
        if path not in files:
            files[path] = rec.full_text()
            listing.append(f"- `{path}`: {rec.name}")
    summary = (
        "This project is licensed under the SPDX license expression\n\n"
        f"    {expr}\n\n"
        "The text of each component is provided in the LICENSES directory:\n\n"
        + "\n".join(listing)
        + "\n"
    )
    return [("LICENSE", summary)] + sorted(files.items())


def annotate_source(content: str, prefix: str, expr: LicenseExpr | str) -> str:
    """Ensure the file carries ``<prefix> SPDX-License-Identifier: <expr>``.

    A leading shebang line stays first.
    """
    text = str(expr)
    wanted = f"{prefix} {IDENTIFIER_TAG} {text}"
    marker = re.compile(rf"^\s*{re.escape(prefix)}\s*{re.escape(IDENTIFIER_TAG)}")
    lines = content.splitlines(keepends=True)
    for i, line in enumerate(lines):
        if marker.match(line):
            body = line.rstrip("\r\n")
            if body == wanted:
                return content
            lines[i] = wanted + line[len(body):]
            return "".join(lines)
    at = 1 if lines and lines[0].startswith("#!") else 0
    if at == 1 and not lines[0].endswith("\n"):
        lines[0] += "\n"
    lines.insert(at, wanted + "\n")
    return "".join(lines)
