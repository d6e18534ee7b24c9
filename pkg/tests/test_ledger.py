from __future__ import annotations

import json
import logging
from datetime import datetime, timedelta, timezone

import jsonschema
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relforge.errors import LedgerError
from relforge.issues import ProtocolDoc, Task, Ticket
from relforge.ledger import (
    ChangelogEntry,
    Ledger,
    NotesTemplate,
    append_entry,
    changelog_schema,
    derive_entry,
    mark_progress,
    render_release_notes,
)
from relforge.version import format_version, parse_version

from strategies import public_versions

V = parse_version
SHA = "3f2a9c1b7d4e5f60718293a4b5c6d7e8f9012345"


def ticket(number=2, type_id="feature", title="Add reader", description="Reads things."):
    return Ticket(number=number, type_id=type_id, title=title, inputs={"description": description})


def entry(version="1.1.0", commit=SHA, date="2025-03-02T10:00:00Z", type="minor", issue=2, pr=10):
    return ChangelogEntry(
        id=f"{version}-{commit[:12]}", issue=issue, pr=pr, type=type, title=f"change {issue}",
        description="d", contributors=("alice",), version=V(version), commit=commit, date=date,
    )


# -- derivation ---------------------------------------------------------------------


def test_derive_entry_example():
    e = derive_entry(
        ticket(), {"number": 10, "participants": ["bob", "alice"]},
        [{"author": "alice"}, {"author": "carol"}, {"author": "alice"}],
        V("1.1.0"), {"commit": SHA, "date": "2025-03-02T10:00:00Z"},
    )
    assert (e.issue, e.pr, e.type, e.version) == (2, 10, "minor", V("1.1.0"))
    assert e.contributors == ("alice", "bob", "carol")
    assert e.description == "Reads things."
    assert e.doi is None and "doi" not in e.to_dict()
    assert e.id == "1.1.0-3f2a9c1b7d4e"


def test_derive_prefers_pr_body():
    e = derive_entry(ticket(), {"number": 10, "body": "PR text"}, [], V("1.1.0"),
                     {"commit": SHA, "date": "2025-03-02T10:00:00Z", "doi": "10.5281/zenodo.1"})
    assert e.description == "PR text" and e.doi == "10.5281/zenodo.1"
    assert "DOI: 10.5281/zenodo.1" in e.identifiers()


@pytest.mark.parametrize("pr,version,ids,match", [
    ({"number": 10}, None, {"commit": SHA, "date": "2025-01-01"}, "version"),
    ({"number": 10}, V("1.1.0"), {"date": "2025-01-01"}, "commit"),
    ({}, V("1.1.0"), {"commit": SHA, "date": "2025-01-01"}, "pull request"),
])
def test_derive_missing_identifiers(pr, version, ids, match):
    with pytest.raises(LedgerError, match=match):
        derive_entry(ticket(), pr, [], version, ids)


def test_bad_date_rejected():
    with pytest.raises(LedgerError, match="ISO-8601"):
        entry(date="yesterday")


# -- append -------------------------------------------------------------------------


def test_append_orders_by_date():
    ledger = Ledger(())
    late = entry("1.2.0", "b" * 40, "2025-04-01T00:00:00Z")
    early = entry("1.1.0", "a" * 40, "2025-03-01T00:00:00Z")
    ledger = append_entry(append_entry(ledger, late), early)
    assert [e.version for e in ledger] == [V("1.1.0"), V("1.2.0")]


def test_duplicate_identity_rejected():
    ledger = append_entry(Ledger(()), entry())
    with pytest.raises(LedgerError, match="duplicate"):
        append_entry(ledger, entry(date="2025-05-01T00:00:00Z"))


def test_same_version_other_commit_allowed():
    ledger = append_entry(append_entry(Ledger(()), entry()), entry(commit="c" * 40))
    assert len(ledger.for_version(V("1.1.0"))) == 2


def test_save_and_load(tmp_path):
    path = tmp_path / "changelog.json"
    assert len(Ledger.load(path)) == 0
    ledger = append_entry(Ledger(()), entry())
    ledger.save(path)
    assert Ledger.load(path).to_dict() == ledger.to_dict()


def test_load_rejects_schema_violation(tmp_path):
    doc = append_entry(Ledger(()), entry()).to_dict()
    doc["entries"][0]["extra"] = 1
    with pytest.raises(LedgerError, match="invalid changelog"):
        Ledger.from_dict(doc)


# -- release notes ----------------------------------------------------------------------


def test_render_groups_and_identifiers():
    entries = [entry("1.2.0", "a" * 40, type="patch", issue=3, pr=11), entry("1.2.0", "b" * 40, issue=4, pr=12)]
    text = render_release_notes(entries, NotesTemplate(), name="relforge")
    assert text.startswith("# relforge 1.2.0")
    assert text.index("## New features") < text.index("## Fixes")
    assert "- change 4 (#4, PR #12)" in text
    assert f"Version: 1.2.0; Commit: {'a' * 40}; Date: 2025-03-02T10:00:00Z" in text
    assert "{" not in text


def test_render_from_default_tree(default_tree):
    assert NotesTemplate.from_tree(default_tree) == NotesTemplate()


def test_render_extra_types_after_configured_groups():
    text = render_release_notes([entry(type="docs"), entry(commit="b" * 40)], NotesTemplate())
    assert text.index("## New features") < text.index("## docs")


def test_render_empty_slice():
    with pytest.raises(LedgerError, match="empty"):
        render_release_notes([], NotesTemplate())


def test_unknown_template_field():
    with pytest.raises(LedgerError, match=r"unresolved template marker \{author\}"):
        NotesTemplate(entry="- {title} by {author}\n")


# -- progress -----------------------------------------------------------------------------


def protocol(n=3):
    return ProtocolDoc(number=2, title="t", urd="u", tasks=tuple(Task(f"t{i}") for i in range(1, n + 1)))


def test_mark_progress_trailers():
    out = mark_progress(protocol(), "fix: reader\n\nTask: 1\nTask: 3\n")
    assert [t.done for t in out.tasks] == [True, False, True]


def test_mark_progress_ignores_prose():
    out = mark_progress(protocol(), "mentions Task: 2 inline")
    assert out.done_count == 0


def test_mark_progress_out_of_range_warns(caplog):
    with caplog.at_level(logging.WARNING):
        out = mark_progress(protocol(), "x\n\nTask: 7\n")
    assert out == protocol()
    assert "task 7" in caplog.text


# -- properties -------------------------------------------------------------------------------

shas = st.text("0123456789abcdef", min_size=40, max_size=40)
dates = st.integers(0, 10_000).map(
    lambda m: (datetime(2025, 1, 1, tzinfo=timezone.utc) + timedelta(minutes=m)).strftime("%Y-%m-%dT%H:%M:%SZ"))


@st.composite
def entries(draw):
    v = draw(public_versions())
    sha = draw(shas)
    return ChangelogEntry(
        id=f"{format_version(v)}-{sha[:12]}", issue=draw(st.integers(1, 99)), pr=draw(st.integers(1, 99)),
        type=draw(st.sampled_from(["major", "minor", "patch"])), title=draw(st.text(max_size=20)),
        description=draw(st.text(max_size=20)), contributors=tuple(sorted(set(draw(st.lists(st.text("abc", min_size=1)))))),
        version=v, commit=sha, date=draw(dates), doi=draw(st.none() | st.just("10.1/x")),
    )


@given(st.lists(entries(), max_size=20))
@settings(max_examples=100)
def test_schema_round_trip(items):
    ledger = Ledger(())
    for e in items:
        try:
            ledger = append_entry(ledger, e)
        except LedgerError:
            pass
    doc = json.loads(ledger.to_json())
    jsonschema.validate(doc, changelog_schema())
    assert Ledger.from_dict(doc) == ledger


@given(st.lists(entries(), max_size=30))
@settings(max_examples=100)
def test_append_ordering_matches_stable_sort(items):
    ledger, kept, seen = Ledger(()), [], set()
    for e in items:
        key = (format_version(e.version), e.commit)
        if key in seen:
            with pytest.raises(LedgerError):
                append_entry(ledger, e)
            continue
        seen.add(key)
        kept.append(e)
        ledger = append_entry(ledger, e)

    def oracle_key(e):
        return datetime.strptime(e.date, "%Y-%m-%dT%H:%M:%SZ"), e.id

    assert list(ledger) == sorted(kept, key=oracle_key)
