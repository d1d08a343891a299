import pytest
from hypothesis import given

from conftest import graphs
from hamcore.formats import (
    FormatError,
    format_edge_list,
    format_matching,
    graph_from_json,
    graph_to_json,
    parse_edge_list,
    parse_matching,
    read_graph,
    write_graph,
)
from hamcore.graph_core import Graph


def test_edge_list_layout():
    g = Graph(4, [(2, 1), (0, 3)])
    assert format_edge_list(g) == "4 2\n0 3\n1 2\n"


@given(graphs(max_n=10))
def test_edge_list_roundtrip(g):
    assert parse_edge_list(format_edge_list(g)) == g


@given(graphs(max_n=10))
def test_json_roundtrip(g):
    assert graph_from_json(graph_to_json(g)) == g


@pytest.mark.parametrize("text", [
    "",
    "3 1\n",
    "3 1\n0 1\n1 2\n",
    "3 1\n1 0\n",
    "3 1\n0 3\n",
    "3 2\n0 1\n0 1\n",
    "x y\n",
    "3 1\n0 1 2\n",
])
def test_edge_list_rejects(text):
    with pytest.raises(FormatError):
        parse_edge_list(text)


def test_json_rejects_bad_m():
    with pytest.raises(FormatError):
        graph_from_json({"n": 3, "m": 2, "edges": [[0, 1]]})
    with pytest.raises(FormatError):
        graph_from_json({"edges": []})


def test_file_roundtrip_both_suffixes(tmp_path):
    g = Graph(5, [(0, 1), (1, 4), (2, 3)])
    for name in ("g.txt", "g.json"):
        write_graph(g, tmp_path / name)
        assert read_graph(tmp_path / name) == g
    with pytest.raises(FormatError):
        read_graph(tmp_path / "missing.txt")
    (tmp_path / "bad.json").write_text("{", encoding="utf-8")
    with pytest.raises(FormatError):
        read_graph(tmp_path / "bad.json")


def test_matching_file_roundtrip():
    text = format_matching([(3, 1), (0, 2)], 4, 5)
    assert text.splitlines()[0] == "matching 4 5 2"
    assert parse_matching(text) == (4, 5, [(0, 2), (1, 3)])
    with pytest.raises(FormatError):
        parse_matching("matching 4 5 3\n0 1\n")
    with pytest.raises(FormatError):
        parse_matching("0 1\n")
