import pytest

from markovbasis.errors import ParseError
from markovbasis.io import (
    format_sample,
    read_basis,
    read_edge_list,
    read_matrix,
    read_sample,
    read_table_csv,
    write_basis,
    write_edge_list,
    write_matrix,
    write_table_csv,
)
from markovbasis.model import Graph, Table


def test_table_roundtrip(tmp_path):
    t = Table((2, 3, 4, 0, 3, 4, 0, 0, 1), (3, 3))
    write_table_csv(tmp_path / "t.csv", t)
    assert read_table_csv(tmp_path / "t.csv") == t


@pytest.mark.parametrize(
    "text,line",
    [("1,2\n3\n", 2), ("1,2\n3,x\n", 2), ("1,-2\n", 1)],
)
def test_table_errors(tmp_path, text, line):
    p = tmp_path / "t.csv"
    p.write_text(text)
    with pytest.raises(ParseError) as exc:
        read_table_csv(p)
    assert exc.value.line == line
    assert f"t.csv:{line}:" in str(exc.value)


def test_missing_file(tmp_path):
    with pytest.raises(ParseError):
        read_table_csv(tmp_path / "nope.csv")


def test_edge_list_roundtrip(tmp_path):
    g = Graph(5, ((0, 1), (1, 0), (3, 4)))
    write_edge_list(tmp_path / "e.txt", g)
    assert read_edge_list(tmp_path / "e.txt", 5) == g


@pytest.mark.parametrize(
    "text,line",
    [("0 1\n1 1\n", 2), ("0 1\n0 1\n", 2), ("0 9\n", 1), ("0 1 2\n", 1), ("# c\n\n0 a\n", 3)],
)
def test_edge_list_errors(tmp_path, text, line):
    p = tmp_path / "e.txt"
    p.write_text(text)
    with pytest.raises(ParseError) as exc:
        read_edge_list(p, 4)
    assert exc.value.line == line


def test_matrix_roundtrip(tmp_path):
    A = [[1, 1, 0], [0, -1, 2]]
    write_matrix(tmp_path / "A.txt", A)
    assert (tmp_path / "A.txt").read_text() == "2 3\n1 1 0\n0 -1 2\n"
    assert read_matrix(tmp_path / "A.txt") == A


@pytest.mark.parametrize("text", ["2 2\n1 1\n", "1 2\n1 1 1\n", "x 2\n1 1\n", ""])
def test_matrix_errors(tmp_path, text):
    p = tmp_path / "A.txt"
    p.write_text(text)
    with pytest.raises(ParseError):
        read_matrix(p)


def test_basis_roundtrip(tmp_path):
    moves = [(1, -1, -1, 1)]
    write_basis(tmp_path / "b.txt", 4, moves)
    assert (tmp_path / "b.txt").read_text() == "4 1\n1 -1 -1 1\n"
    assert read_basis(tmp_path / "b.txt") == moves


def test_basis_zero_move(tmp_path):
    p = tmp_path / "b.txt"
    p.write_text("2 1\n0 0\n")
    with pytest.raises(ParseError):
        read_basis(p)


def test_sample_roundtrip(tmp_path):
    p = tmp_path / "s.txt"
    p.write_text(format_sample([1, 1, 1, 1], [(1, 0, 0, 1), (0, 1, 1, 0)]))
    assert read_sample(p) == ([1, 1, 1, 1], [(1, 0, 0, 1), (0, 1, 1, 0)])
