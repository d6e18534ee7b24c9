"""SPDX licensing: expressions, registry, documents and annotation."""

from .docs import (
    annotate_source,
    check_compatibility,
    customize_license_text,
    generate_license_docs,
    validate_license_expr,
)
from .expr import (
    And,
    LicenseExpr,
    LicenseId,
    Or,
    WithException,
    format_license_expr,
    parse_license_expr,
)
from .registry import ExceptionRecord, LicenseRecord, LicenseRegistry, default_registry

__all__ = [
    "And",
    "ExceptionRecord",
    "LicenseExpr",
    "LicenseId",
    "LicenseRecord",
    "LicenseRegistry",
    "Or",
    "WithException",
    "annotate_source",
    "check_compatibility",
    "customize_license_text",
    "default_registry",
    "format_license_expr",
    "generate_license_docs",
    "parse_license_expr",
    "validate_license_expr",
]
