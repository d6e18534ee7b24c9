"""Default generators turning the resolved control center into repository files."""

from __future__ import annotations

import yaml

from ..issues import compile_forms, refresh_form_choices
from ..license import default_registry, generate_license_docs
from .sync import FileGenerator
from .tree import ConfigTree


def _readme(tree: ConfigTree) -> list[tuple[str, str]]:
    name = tree.get("name")
    lines = [f"# {tree.get('title', name)}", ""]
    sections = tree.get("docs.readme.sections", ["abstract", "highlights", "license"])
    for section in sections:
        if section == "abstract" and tree.has("abstract"):
            lines += [str(tree.get("abstract")).strip(), ""]
        elif section == "highlights" and tree.get("highlights"):
            lines += ["## Highlights", ""]
            lines += [f"- **{h['title']}**: {h['description']}" for h in tree.get("highlights")]
            lines.append("")
        elif section == "license" and tree.has("license.expr"):
            lines += ["## License", "", f"Distributed under `{tree.get('license.expr')}`. See `LICENSE`.", ""]
    return [("README.md", "\n".join(lines))]


def _citation(tree: ConfigTree) -> list[tuple[str, str]]:
    doc = {
        "cff-version": "1.2.0",
        "message": tree.get("citation.message", "If you use this software, please cite it."),
        "title": tree.get("citation.title", tree.get("title", tree.get("name"))),
        "type": "software",
        "authors": [dict(a) for a in tree.get("citation.authors", [])],
    }
    if tree.has("citation.license"):
        doc["license"] = tree.get("citation.license")
    if tree.has("abstract"):
        doc["abstract"] = str(tree.get("abstract")).strip()
    if tree.get("keywords"):
        doc["keywords"] = list(tree.get("keywords"))
    released = tree.get("vcs.released_versions", [])
    if released:
        doc["version"] = released[0]
    return [("CITATION.cff", yaml.safe_dump(doc, sort_keys=False, allow_unicode=True, width=1000))]


def _license(tree: ConfigTree) -> list[tuple[str, str]]:
    if not tree.has("license.expr"):
        return []
    fields = {"year": tree.get("license.year", ""), "holder": tree.get("license.holder", "")}
    return generate_license_docs(str(tree.get("license.expr")), default_registry(), fields)


def _issue_forms(tree: ConfigTree) -> list[tuple[str, str]]:
    forms = refresh_form_choices(
        compile_forms(tree),
        api_index=tree.get("issues.api_endpoints", []) or [],
        versions=tree.get("vcs.released_versions", []) or [],
    )
    return [(f.path, f.to_yaml()) for f in forms]


README = FileGenerator("readme", _readme)
CITATION = FileGenerator("citation", _citation)
LICENSE = FileGenerator("license", _license)
ISSUE_FORMS = FileGenerator("issue-forms", _issue_forms)


def default_generators() -> list[FileGenerator]:
    return [README, CITATION, LICENSE, ISSUE_FORMS]
