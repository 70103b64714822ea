"""Plain-text readers and writers for tables, edge lists, matrices and bases.

Readers raise :class:`ParseError` carrying the file path and 1-based line.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ParseError
from .model import Graph, Table


def _int(tok: str, path, line: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(path, line, f"not an integer: {tok!r}") from None


def _lines(path) -> list[tuple[int, str]]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(path, None, f"cannot read file ({exc.strerror})") from None
    out = []
    for k, raw in enumerate(text.splitlines(), start=1):
        s = raw.split("#", 1)[0].strip()
        if s:
            out.append((k, s))
    return out


def read_table_csv(path) -> Table:
    """Rectangular CSV of nonnegative integers, no header; flattened row-major."""
    rows: list[list[int]] = []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ParseError(path, None, f"cannot read file ({exc.strerror})") from None
    with fh:
        for k, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not f.strip() for f in rec):
                continue
            row = [_int(f.strip(), path, k) for f in rec]
            if any(x < 0 for x in row):
                raise ParseError(path, k, "table entries must be nonnegative")
            if rows and len(row) != len(rows[0]):
                raise ParseError(path, k, f"expected {len(rows[0])} fields, found {len(row)}")
            rows.append(row)
    if not rows:
        raise ParseError(path, None, "empty table")
    return Table(tuple(x for r in rows for x in r), (len(rows), len(rows[0])))


def write_table_csv(path, table: Table) -> None:
    arr = table.as_array()
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(arr.tolist())


def read_edge_list(path, n: int) -> Graph:
    """One ``i j`` pair per line, 0-based, meaning an edge ``i -> j``."""
    edges = []
    seen: dict[tuple[int, int], int] = {}
    for k, s in _lines(path):
        toks = s.replace(",", " ").split()
        if len(toks) != 2:
            raise ParseError(path, k, f"expected 'i j', found {s!r}")
        i, j = _int(toks[0], path, k), _int(toks[1], path, k)
        if not (0 <= i < n and 0 <= j < n):
            raise ParseError(path, k, f"node id outside 0..{n - 1}")
        if i == j:
            raise ParseError(path, k, f"self-loop at node {i}")
        if (i, j) in seen:
            raise ParseError(path, k, f"duplicate edge, first seen on line {seen[i, j]}")
        seen[i, j] = k
        edges.append((i, j))
    return Graph(n, tuple(edges))


def write_edge_list(path, g: Graph) -> None:
    Path(path).write_text("".join(f"{i} {j}\n" for i, j in g.edges))


def _read_header_rows(path, what: str) -> tuple[int, int, list[list[int]]]:
    lines = _lines(path)
    if not lines:
        raise ParseError(path, None, f"empty {what} file")
    k0, head = lines[0]
    toks = head.split()
    if len(toks) != 2:
        raise ParseError(path, k0, f"header must be two integers, found {head!r}")
    a, b = (_int(t, path, k0) for t in toks)
    if a < 0 or b < 0:
        raise ParseError(path, k0, "header sizes must be nonnegative")
    return a, b, lines[1:]


def read_matrix(path) -> list[list[int]]:
    """First line ``m r``, then ``m`` rows of ``r`` integers."""
    m, r, body = _read_header_rows(path, "matrix")
    if m < 1 or r < 1:
        raise ParseError(path, None, "matrix needs at least one row and one column")
    rows = []
    for k, s in body:
        row = [_int(t, path, k) for t in s.split()]
        if len(row) != r:
            raise ParseError(path, k, f"expected {r} entries, found {len(row)}")
        rows.append(row)
    if len(rows) != m:
        raise ParseError(path, body[-1][0] if body else None, f"expected {m} rows, found {len(rows)}")
    return rows


def write_matrix(path, A: Sequence[Sequence[int]]) -> None:
    Path(path).write_text(format_rows(len(A), len(A[0]), A))


def format_rows(a: int, b: int, rows: Iterable[Sequence[int]]) -> str:
    return f"{a} {b}\n" + "".join(" ".join(str(int(x)) for x in row) + "\n" for row in rows)


def read_basis(path) -> list[tuple[int, ...]]:
    """First line ``r n`` (vector length, move count), then ``n`` rows of ``r`` integers."""
    r, n, body = _read_header_rows(path, "basis")
    moves = []
    for k, s in body:
        row = tuple(_int(t, path, k) for t in s.split())
        if len(row) != r:
            raise ParseError(path, k, f"expected {r} entries, found {len(row)}")
        if not any(row):
            raise ParseError(path, k, "zero move")
        moves.append(row)
    if len(moves) != n:
        raise ParseError(path, body[-1][0] if body else None, f"expected {n} moves, found {len(moves)}")
    return moves


def write_basis(path, r: int, moves: Sequence[Sequence[int]]) -> None:
    Path(path).write_text(format_rows(r, len(moves), moves))


def format_sample(statistics: Sequence[int], states: Iterable[Sequence[int]]) -> str:
    """Header line with the statistics vector, then one table per line."""
    head = "# statistics " + " ".join(str(x) for x in statistics) + "\n"
    return head + "".join(" ".join(str(x) for x in s) + "\n" for s in states)


def read_sample(path) -> tuple[list[int], list[tuple[int, ...]]]:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("# statistics"):
        raise ParseError(path, 1, "missing '# statistics' header")
    stats = [_int(t, path, 1) for t in text[0].split()[2:]]
    states = [tuple(_int(t, path, k) for t in s.split()) for k, s in enumerate(text[1:], start=2) if s.strip()]
    return stats, states
