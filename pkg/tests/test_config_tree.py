from __future__ import annotations

import pytest

from relforge.config.tree import ConfigNode, ConfigTree, load_tree, parse_document, parse_path
from relforge.errors import ConfigError
from relforge.report import Origin


def write(directory, name, text):
    (directory / name).write_text(text, encoding="utf-8")


def test_disjoint_files_merge(tmp_path):
    write(tmp_path, "proj.yaml", "name: X\n")
    write(tmp_path, "team.yaml", "team: []\n")
    tree = load_tree(tmp_path)
    assert tree.to_data() == {"name": "X", "team": []}
    assert tree.origin("name") == Origin(str(tmp_path / "proj.yaml"), 1)


def test_duplicate_top_level_key_names_both_origins(tmp_path):
    write(tmp_path, "a.yaml", "name: X\n")
    write(tmp_path, "b.yaml", "other: 1\nname: Y\n")
    with pytest.raises(ConfigError) as err:
        load_tree(tmp_path)
    assert "a.yaml:1" in str(err.value) and "b.yaml:2" in str(err.value)


def test_empty_directory(tmp_path):
    with pytest.raises(ConfigError, match="no control-center documents"):
        load_tree(tmp_path)


def test_missing_directory(tmp_path):
    with pytest.raises(ConfigError):
        load_tree(tmp_path / "absent")


def test_unparsable_document_reports_file_and_line(tmp_path):
    write(tmp_path, "bad.yaml", "name: X\nlist: [1, 2\n")
    with pytest.raises(ConfigError) as err:
        load_tree(tmp_path)
    assert "bad.yaml:" in str(err.value)


def test_duplicate_key_inside_one_mapping(tmp_path):
    write(tmp_path, "a.yaml", "team:\n  x: 1\n  x: 2\n")
    with pytest.raises(ConfigError, match="duplicate"):
        load_tree(tmp_path)


def test_origins_track_lines():
    node = parse_document("a:\n  b: 1\n  c:\n    - x\n    - y\n", "f.yaml")
    tree = ConfigTree(node)
    assert tree.origin("a.b") == Origin("f.yaml", 2)
    assert tree.origin("a.c.1") == Origin("f.yaml", 5)
    assert tree.get("a.c.1") == "y"


def test_origin_of_missing_path_falls_back_to_ancestor():
    tree = ConfigTree(parse_document("a:\n  b: 1\n", "f.yaml"))
    assert tree.origin("a.zzz") == Origin("f.yaml", 2) or tree.origin("a.zzz").line >= 1


def test_scalar_kinds():
    tree = ConfigTree(parse_document("s: x\ni: 3\nf: 1.5\nb: true\nn: null\nd: 2025-01-02\n", "f.yaml"))
    kinds = {k: tree.node(k).kind for k in "sifbn"}
    assert kinds == {"s": "string", "i": "integer", "f": "float", "b": "boolean", "n": "null"}
    assert tree.get("d") == "2025-01-02"


def test_root_must_be_mapping():
    with pytest.raises(ConfigError):
        ConfigTree(ConfigNode.from_data([1, 2], Origin("x", 1)))


@pytest.mark.parametrize("text,expected", [("a.b.0", ("a", "b", 0)), ("", ()), ("x", ("x",))])
def test_parse_path(text, expected):
    assert parse_path(text) == expected


def test_parse_path_rejects_bad_segment():
    with pytest.raises(ConfigError):
        parse_path("a..b")


def test_set_and_delete_paths():
    tree = ConfigTree.from_data({"a": {"b": 1}})
    tree.set("a.c.d", ConfigNode.from_data(2, Origin("m", 0)))
    assert tree.get("a.c.d") == 2
    tree.delete("a.b")
    assert not tree.has("a.b")
    assert tree.get("a.b", None) is None
