"""Command-line interface.

Exit status: 0 on success, 1 when the input fails validation or an engine
rejects it, 2 on usage errors.
"""

from __future__ import annotations

import functools
import json
import logging
import sys
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import click

from . import __version__
from .errors import RelforgeError
from .report import ValidationReport

log = logging.getLogger("relforge")


# -- helpers ----------------------------------------------------------------


def _emit(ctx: click.Context, human: str | Callable[[], str], machine: Any) -> None:
    if ctx.obj.get("json"):
        click.echo(json.dumps(machine, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        click.echo(human() if callable(human) else human)


def _emit_report(ctx: click.Context, report: ValidationReport, ok_text: str = "ok") -> None:
    _emit(ctx, lambda: "\n".join(str(f) for f in report) or ok_text, report.to_dict())
    if report.errors:
        ctx.exit(1)


def command(group: click.Group, name: str | None = None, **kwargs):
    """Register a subcommand that accepts ``--json`` and maps engine errors to exit 1."""

    def decorate(fn):
        @group.command(name, **kwargs)
        @click.option("--json", "as_json", is_flag=True, help="Machine-readable JSON output.")
        @click.pass_context
        @functools.wraps(fn)
        def wrapper(ctx, as_json, *args, **kw):
            ctx.ensure_object(dict)
            if as_json:
                ctx.obj["json"] = True
            try:
                return ctx.invoke(fn, *args, **kw)
            except RelforgeError as exc:
                click.echo(f"error: {exc}", err=True)
                ctx.exit(1)

        return wrapper

    return decorate


def _read_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise click.BadParameter(f"{path}: {exc}") from None


def _control_dir(control: str | None) -> Path:
    if control:
        return Path(control)
    local = Path(".control")
    if local.is_dir():
        return local
    return Path(str(resources.files("relforge") / "data" / "control"))


def _state(path: str | None):
    from .vcs import RepoState

    return RepoState.from_dict(_read_json(path)) if path else None


def _build(control: str | None, state=None, cache: str | None = None, offline: bool = False, now: float | None = None):
    import time

    from .config.cache import CacheStore
    from .config.inherit import default_fetcher
    from .config.pipeline import build_tree

    directory = _control_dir(control)
    return build_tree(
        directory,
        fetcher=None if offline else default_fetcher(directory),
        cache=CacheStore(cache) if cache else None,
        now=time.time() if now is None else now,
        state=state,
    )


def _tree(control: str | None, state=None):
    built = _build(control, state, offline=True)
    if built.report.errors:
        raise RelforgeError(f"control center is invalid: {built.report.errors[0]}")
    return built.tree


control_option = click.option("--control", type=click.Path(file_okay=False), help="Control-center directory.")
state_option = click.option("--state", type=click.Path(exists=True, dir_okay=False), help="Repository snapshot (JSON).")


# -- root -------------------------------------------------------------------


@click.group()
@click.version_option(__version__, prog_name="relforge")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable JSON output.")
@click.option("-v", "--verbose", count=True, help="Log more (repeatable).")
@click.pass_context
def main(ctx: click.Context, as_json: bool, verbose: int) -> None:
    """Project configuration, versioning and release automation."""
    ctx.ensure_object(dict)
    ctx.obj["json"] = as_json
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


@command(main, "sync")
@control_option
@state_option
@click.option("--workspace", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--cache", type=click.Path(file_okay=False), help="Inheritance cache directory.")
@click.option("--offline", is_flag=True, help="Never fetch; rely on the cache.")
@click.pass_context
def sync_cmd(ctx, control, state, workspace, cache, offline):
    """Regenerate repository files from the control center."""
    from .config.generators import default_generators
    from .config.sync import synchronize

    built = _build(control, _state(state), cache, offline)
    if built.report.errors:
        _emit_report(ctx, built.report)
    report = synchronize(built.tree, default_generators(), workspace)

    def human():
        rows = [(k, p) for k, paths in report.to_dict().items() for p in paths if k != "unchanged"]
        return "\n".join(f"{k}: {p}" for k, p in rows) or "up to date"

    _emit(ctx, human, report.to_dict())


@command(main, "validate")
@control_option
@state_option
@click.option("--cache", type=click.Path(file_okay=False), help="Inheritance cache directory.")
@click.option("--offline", is_flag=True, help="Never fetch; rely on the cache.")
@click.pass_context
def validate_cmd(ctx, control, state, cache, offline):
    """Validate the resolved control center against its schemas."""
    _emit_report(ctx, _build(control, _state(state), cache, offline).report)


# -- version ----------------------------------------------------------------


@main.group("version")
def version_group():
    """Parse and compute version identifiers."""


@command(version_group, "parse")
@click.argument("text")
@click.pass_context
def version_parse(ctx, text):
    from .version import format_version, parse_version

    v = parse_version(text)
    doc = {
        "version": format_version(v),
        "release": [v.release.major, v.release.minor, v.release.patch],
        "pre": None if v.pre is None else {"phase": v.pre.phase, "number": v.pre.number},
        "post": v.post,
        "dev": v.dev,
    }
    _emit(ctx, doc["version"], doc)


def _target_for(state, issue: int, target: str | None) -> str:
    from .vcs import DevelopmentBranch

    if target:
        return target
    targets = sorted({b.kind.target for b in state.branches.values()
                      if isinstance(b.kind, DevelopmentBranch) and b.kind.issue == issue})
    return targets[0] if len(targets) == 1 else state.main.name


@command(version_group, "next")
@click.option("--state", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--issue", type=click.IntRange(min=1), required=True)
@click.option("--type", "change_type", required=True, help="major, minor, patch or an issue type id.")
@click.option("--target", help="Target branch (default: the issue's development target or main).")
@click.pass_context
def version_next(ctx, state, issue, change_type, target):
    """Next developmental release for an issue."""
    from .version import format_version, next_dev_version

    repo = _state(state)
    v = next_dev_version(repo.issue_history(issue), repo.branch(_target_for(repo, issue, target)).tags,
                         change_type, issue)
    _emit(ctx, format_version(v), {"version": format_version(v)})


@command(version_group, "finalize")
@click.option("--state", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--issue", type=click.IntRange(min=1), required=True)
@click.option("--type", "change_type", required=True, help="major, minor, patch or an issue type id.")
@click.option("--target", help="Target branch (default: the issue's development target or main).")
@click.pass_context
def version_finalize(ctx, state, issue, change_type, target):
    """Final release an issue's latest prerelease would merge as."""
    from .version import final, finalize_version, format_version

    repo = _state(state)
    history = list(repo.issue_history(issue))
    if not history:
        raise RelforgeError(f"issue #{issue} has no tagged versions")
    v = final(finalize_version(max(history), repo.branch(_target_for(repo, issue, target)).tags, change_type))
    _emit(ctx, format_version(v), {"version": format_version(v)})


# -- issue ------------------------------------------------------------------


@main.group("issue")
def issue_group():
    """Issue forms, submissions and status transitions."""


def _forms(control, state):
    from .issues import compile_forms, refresh_form_choices

    tree = _tree(control, state)
    return tree, refresh_form_choices(compile_forms(tree), state, tree.get("issues.api_endpoints", []) or [])


@command(issue_group, "compile-forms")
@control_option
@state_option
@click.option("--out", type=click.Path(file_okay=False), help="Write form files below this directory.")
@click.pass_context
def issue_compile(ctx, control, state, out):
    """Compile issue forms from the control center."""
    _, forms = _forms(control, _state(state))
    if out:
        for f in forms:
            path = Path(out) / f.path
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(f.to_yaml(), encoding="utf-8")
    _emit(ctx, lambda: "\n".join(f"--- {f.path}\n{f.to_yaml()}" for f in forms),
          {f.path: f.to_document() for f in forms})


@command(issue_group, "process")
@click.option("--form", "form_id", required=True)
@click.option("--payload", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--number", type=click.IntRange(min=1))
@click.option("--protocol-out", type=click.Path(dir_okay=False), help="Write the protocol document here.")
@control_option
@state_option
@click.pass_context
def issue_process(ctx, form_id, payload, number, protocol_out, control, state):
    """Turn a form submission into a labeled ticket and protocol document."""
    from .issues import process_submission

    tree, forms = _forms(control, _state(state))
    form = next((f for f in forms if f.id == form_id), None)
    if form is None:
        raise RelforgeError(f"no issue form {form_id!r}")
    ticket, protocol = process_submission(form, _read_json(payload), tree, number)
    text = protocol.render()
    if protocol_out:
        Path(protocol_out).write_text(text, encoding="utf-8")
    _emit(ctx, lambda: "labels: " + ", ".join(ticket.labels) + "\n\n" + text,
          {"ticket": ticket.to_dict(), "protocol": text})


@command(issue_group, "transition")
@click.option("--ticket", "ticket_file", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--label", required=True)
@control_option
@state_option
@click.pass_context
def issue_transition(ctx, ticket_file, label, control, state):
    """Plan the automation for a status label change."""
    from .issues import Ticket, apply_status_transition

    repo = _state(state)
    plan = apply_status_transition(Ticket.from_dict(_read_json(ticket_file)), label, repo, _tree(control, repo))
    _emit(ctx, lambda: "\n".join(plan.task_ids), plan.to_dict())


# -- changelog --------------------------------------------------------------


@main.group("changelog")
def changelog_group():
    """Machine-readable changelog and release notes."""


@command(changelog_group, "append")
@click.option("--ledger", "ledger_file", type=click.Path(dir_okay=False), default="changelog.json", show_default=True)
@click.option("--entry", type=click.Path(exists=True, dir_okay=False), required=True)
@click.pass_context
def changelog_append(ctx, ledger_file, entry):
    """Append one entry (JSON) to the changelog."""
    from .ledger import ChangelogEntry, Ledger, append_entry

    ledger = append_entry(Ledger.load(ledger_file), ChangelogEntry.from_dict(_read_json(entry)))
    ledger.save(ledger_file)
    _emit(ctx, f"{ledger_file}: {len(ledger)} entries", ledger.to_dict())


@command(changelog_group, "render")
@click.option("--ledger", "ledger_file", type=click.Path(exists=True, dir_okay=False), default="changelog.json",
              show_default=True)
@click.option("--version", "version_text", help="Only entries of this version (default: the latest).")
@control_option
@click.pass_context
def changelog_render(ctx, ledger_file, version_text, control):
    """Render Markdown release notes."""
    from .ledger import Ledger, NotesTemplate, render_release_notes
    from .version import parse_version

    ledger = Ledger.load(ledger_file)
    if not len(ledger):
        raise RelforgeError(f"{ledger_file} has no entries")
    v = parse_version(version_text) if version_text else max(e.version for e in ledger)
    tree = _tree(control)
    notes = render_release_notes(ledger.for_version(v), NotesTemplate.from_tree(tree), str(tree.get("name", "")))
    _emit(ctx, notes.rstrip("\n"), {"notes": notes})


# -- license ----------------------------------------------------------------


@main.group("license")
def license_group():
    """SPDX license expressions."""


def _expr_doc(node) -> dict:
    from .license import And, LicenseId, WithException

    if isinstance(node, LicenseId):
        return {"license": node.id, "or_later": node.or_later}
    if isinstance(node, WithException):
        return {"with": {"license": _expr_doc(node.license), "exception": node.exception}}
    op = "and" if isinstance(node, And) else "or"
    return {op: [_expr_doc(node.left), _expr_doc(node.right)]}


@command(license_group, "parse")
@click.argument("expr")
@click.pass_context
def license_parse(ctx, expr):
    from .license import parse_license_expr

    node = parse_license_expr(expr)
    _emit(ctx, str(node), {"expression": str(node), "tree": _expr_doc(node)})


@command(license_group, "validate")
@click.argument("expr")
@click.pass_context
def license_validate(ctx, expr):
    from .license import default_registry, validate_license_expr

    _emit_report(ctx, validate_license_expr(expr, default_registry()))


@command(license_group, "apply")
@click.option("--expr", required=True)
@click.option("--prefix", default="#", show_default=True, help="Comment prefix of the files.")
@click.argument("files", nargs=-1, type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def license_apply(ctx, expr, prefix, files):
    """Add or refresh SPDX-License-Identifier lines in source files."""
    from .license import annotate_source, default_registry, parse_license_expr, validate_license_expr

    node = parse_license_expr(expr)
    report = validate_license_expr(node, default_registry())
    if report.errors:
        _emit_report(ctx, report)
    changed = []
    for name in files:
        path = Path(name)
        old = path.read_text(encoding="utf-8")
        new = annotate_source(old, prefix, node)
        if new != old:
            path.write_text(new, encoding="utf-8")
            changed.append(name)
    _emit(ctx, lambda: "\n".join(f"annotated: {c}" for c in changed) or "nothing to do", {"changed": changed})


# -- dispatch ---------------------------------------------------------------


@command(main, "dispatch")
@click.option("--event", "event_file", type=click.Path(exists=True, dir_okay=False), help="Event document (JSON).")
@click.option("--replay", "log_file", type=click.Path(exists=True, dir_okay=False), help="Event log (JSON lines).")
@click.option("--state", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--state-out", type=click.Path(dir_okay=False), help="Write the final snapshot after replay.")
@control_option
@click.pass_context
def dispatch_cmd(ctx, event_file, log_file, state, state_out, control):
    """Plan one event, or replay an event log from a snapshot."""
    from .orchestrator import RepoEvent, dispatch
    from .replay import read_event_log, replay

    if bool(event_file) == bool(log_file):
        raise click.UsageError("give exactly one of --event or --replay")
    repo = _state(state)
    tree = _tree(control, repo)
    if event_file:
        plan = dispatch(RepoEvent.from_dict(_read_json(event_file)), repo, tree)
        _emit(ctx, lambda: "\n".join(plan.task_ids), plan.to_dict())
        return
    result = replay(read_event_log(log_file), repo, tree)
    if state_out:
        Path(state_out).write_text(json.dumps(result.state.to_dict(), indent=2) + "\n", encoding="utf-8")
    _emit(ctx, lambda: "\n".join(result.tags), result.to_dict())


if __name__ == "__main__":  # pragma: no cover
    main()
