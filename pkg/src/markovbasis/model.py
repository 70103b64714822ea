"""Design matrices for the supported log-linear families, plus data ingestion.

Two worked families are built in: independence of two categorical variables
(row and column sums) and the dyadic p1 network model with reciprocity. Any
other model comes in through :func:`generic_design`.

Dyadic layout: unordered pairs ``(i, j)`` with ``i < j`` are listed in
lexicographic order; each contributes four consecutive cells in the state
order ``00, 10, 01, 11`` where ``10`` means ``i -> j`` only.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DimensionError, ModelInvalidError
from .intlin import as_int_matrix, in_row_span, matvec

RECIPROCITY_MODES = ("zero", "constant", "differential")
DYAD_STATES = ("00", "10", "01", "11")


def dyads(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


@dataclass(frozen=True)
class Table:
    """A flattened table of nonnegative counts.

    ``shape`` is the table's dimensions; dyadic tables (``nodes`` set) have
    shape ``(n(n-1)/2, 4)`` and exactly one 1 in each block of four.
    """

    cells: tuple[int, ...]
    shape: tuple[int, ...]
    nodes: int | None = None

    def __post_init__(self):
        cells = tuple(int(c) for c in self.cells)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "shape", tuple(int(d) for d in self.shape))
        if math.prod(self.shape) != len(cells):
            raise DimensionError(f"{len(cells)} cells do not fit shape {self.shape}")
        if any(c < 0 for c in cells):
            raise DimensionError("table entries must be nonnegative")
        if self.nodes is not None:
            n = self.nodes
            if self.shape != (n * (n - 1) // 2, 4):
                raise DimensionError(f"dyadic table for {n} nodes has wrong shape {self.shape}")
            for d in range(self.shape[0]):
                block = cells[4 * d : 4 * d + 4]
                if sorted(block) != [0, 0, 0, 1]:
                    raise DimensionError(f"dyad block {d} is not one-hot: {block}")

    @classmethod
    def from_array(cls, array) -> "Table":
        arr = np.asarray(array)
        return cls(tuple(int(x) for x in arr.ravel()), arr.shape)

    def with_cells(self, cells: Sequence[int]) -> "Table":
        return Table(tuple(cells), self.shape, self.nodes)

    def as_array(self) -> np.ndarray:
        return np.array(self.cells, dtype=np.int64).reshape(self.shape)

    @property
    def total(self) -> int:
        return sum(self.cells)

    def __len__(self):
        return len(self.cells)


@dataclass(frozen=True)
class Graph:
    """A simple directed graph on nodes ``0..n-1`` without self-loops."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        edges = tuple((int(i), int(j)) for i, j in self.edges)
        object.__setattr__(self, "edges", edges)
        seen = set()
        for i, j in edges:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise DimensionError(f"edge {(i, j)} outside 0..{self.n - 1}")
            if i == j:
                raise DimensionError(f"self-loop at node {i}")
            if (i, j) in seen:
                raise DimensionError(f"duplicate edge {(i, j)}")
            seen.add((i, j))


@dataclass(frozen=True)
class ModelSpec:
    """A log-linear model: its family, integer design matrix and labels."""

    family: str
    design: tuple[tuple[int, ...], ...]
    cell_labels: tuple[str, ...]
    statistic_labels: tuple[str, ...]
    params: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        design = tuple(tuple(row) for row in as_int_matrix(self.design))
        object.__setattr__(self, "design", design)
        if len(self.cell_labels) != len(design[0]):
            raise DimensionError("one cell label per design column is required")
        if len(self.statistic_labels) != len(design):
            raise DimensionError("one statistic label per design row is required")
        if not in_row_span(design, [1] * len(design[0])):
            raise ModelInvalidError(
                "the all-ones vector is not in the rational row span of the design matrix"
            )

    @property
    def n_cells(self) -> int:
        return len(self.design[0])

    @cached_property
    def design_array(self) -> np.ndarray:
        arr = np.array(self.design, dtype=np.int64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def sparse_columns(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """For each cell, the (row, coefficient) pairs with nonzero coefficient."""
        return tuple(
            tuple((r, row[c]) for r, row in enumerate(self.design) if row[c])
            for c in range(self.n_cells)
        )

    @property
    def nodes(self) -> int | None:
        return self.params.get("n") if self.family == "p1" else None

    def make_table(self, cells: Sequence[int]) -> Table:
        if len(cells) != self.n_cells:
            raise DimensionError(f"{len(cells)} cells against {self.n_cells} design columns")
        if self.family == "p1":
            n = self.params["n"]
            return Table(tuple(cells), (n * (n - 1) // 2, 4), n)
        if self.family == "independence":
            return Table(tuple(cells), (self.params["d1"], self.params["d2"]))
        return Table(tuple(cells), (len(cells),))


def independence_design(d1: int, d2: int) -> ModelSpec:
    """Row-sum and column-sum statistics for a ``d1 x d2`` table."""
    if d1 < 2 or d2 < 2:
        raise DimensionError(f"independence model needs d1, d2 >= 2, got {d1}, {d2}")
    rows = []
    for i in range(d1):
        rows.append([int(c // d2 == i) for c in range(d1 * d2)])
    for j in range(d2):
        rows.append([int(c % d2 == j) for c in range(d1 * d2)])
    return ModelSpec(
        family="independence",
        design=rows,
        cell_labels=tuple(f"({i},{j})" for i in range(d1) for j in range(d2)),
        statistic_labels=tuple(f"row{i}" for i in range(d1)) + tuple(f"col{j}" for j in range(d2)),
        params={"d1": d1, "d2": d2},
    )


def p1_design(n: int, mode: str = "constant") -> ModelSpec:
    """Dyadic p1 design on ``n`` nodes.

    Rows, in order: one per dyad (its four cells sum to 1), out-degree per
    node, in-degree per node, then reciprocity rows (none for ``zero``, one
    global count for ``constant``, one per node for ``differential``).
    """
    if n < 3:
        raise DimensionError(f"p1 model needs at least 3 nodes, got {n}")
    if mode not in RECIPROCITY_MODES:
        raise DimensionError(f"unknown reciprocity mode {mode!r}")
    pairs = dyads(n)
    ncells = 4 * len(pairs)
    dyad_rows = []
    out_rows = [[0] * ncells for _ in range(n)]
    in_rows = [[0] * ncells for _ in range(n)]
    mutual_rows = [[0] * ncells for _ in range(n)]
    for d, (i, j) in enumerate(pairs):
        row = [0] * ncells
        row[4 * d : 4 * d + 4] = [1, 1, 1, 1]
        dyad_rows.append(row)
        # 10: i -> j ; 01: j -> i ; 11: both
        for s, (src, dst) in ((1, (i, j)), (2, (j, i))):
            out_rows[src][4 * d + s] = 1
            in_rows[dst][4 * d + s] = 1
        for k in (i, j):
            out_rows[k][4 * d + 3] = 1
            in_rows[k][4 * d + 3] = 1
            mutual_rows[k][4 * d + 3] = 1
    rows = dyad_rows + out_rows + in_rows
    labels = [f"dyad{i}{j}" for i, j in pairs] + [f"out{i}" for i in range(n)] + [f"in{i}" for i in range(n)]
    if mode == "constant":
        rows.append([int(c % 4 == 3) for c in range(ncells)])
        labels.append("mutual")
    elif mode == "differential":
        rows += mutual_rows
        labels += [f"mutual{i}" for i in range(n)]
    return ModelSpec(
        family="p1",
        design=rows,
        cell_labels=tuple(f"{i}-{j}:{s}" for i, j in pairs for s in DYAD_STATES),
        statistic_labels=tuple(labels),
        params={"n": n, "mode": mode},
    )


def generic_design(A, cell_labels=None, statistic_labels=None) -> ModelSpec:
    """Wrap a user-supplied design matrix, checking the row-span condition."""
    A = as_int_matrix(A)
    m, r = len(A), len(A[0])
    return ModelSpec(
        family="generic",
        design=A,
        cell_labels=tuple(cell_labels) if cell_labels is not None else tuple(f"c{c}" for c in range(r)),
        statistic_labels=(
            tuple(statistic_labels) if statistic_labels is not None else tuple(f"s{i}" for i in range(m))
        ),
    )


def graph_to_table(g: Graph, mode: str | None = None) -> Table:
    """Dyadic table of a digraph. ``mode`` does not change the layout."""
    edges = set(g.edges)
    cells = []
    for i, j in dyads(g.n):
        state = int((i, j) in edges) + 2 * int((j, i) in edges)
        block = [0, 0, 0, 0]
        block[state] = 1
        cells.extend(block)
    return Table(tuple(cells), (len(cells) // 4, 4), g.n)


def table_to_graph(u: Table) -> Graph:
    if u.nodes is None:
        raise DimensionError("table is not dyadic")
    edges = []
    for d, (i, j) in enumerate(dyads(u.nodes)):
        state = u.cells[4 * d : 4 * d + 4].index(1)
        if state & 1:
            edges.append((i, j))
        if state & 2:
            edges.append((j, i))
    return Graph(u.nodes, tuple(edges))


def sufficient_statistics(spec: ModelSpec, u) -> list[int]:
    cells = u.cells if isinstance(u, Table) else tuple(u)
    if len(cells) != spec.n_cells:
        raise DimensionError(f"{len(cells)} cells against {spec.n_cells} design columns")
    return matvec(spec.design, cells)


def conditional_log_weight(u) -> float:
    """Log of ``1 / prod(u_c!)``, the unnormalized conditional weight on a fiber."""
    cells = u.cells if isinstance(u, Table) else u
    return -math.fsum(math.lgamma(c + 1) for c in cells)


def planted_reciprocity_graph(n: int, mutual: int, oneway: int, seed: int) -> Graph:
    """Random digraph with ``mutual`` reciprocated dyads and ``oneway`` single edges.

    Dyads are drawn without replacement; each one-way edge gets a random
    direction. Uses numpy's PCG64 seeded with ``seed``.
    """
    pairs = dyads(n)
    if mutual + oneway > len(pairs):
        raise DimensionError(f"{mutual + oneway} dyads requested, only {len(pairs)} exist")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(pairs))
    edges = []
    for d in order[:mutual]:
        i, j = pairs[d]
        edges += [(i, j), (j, i)]
    for d in order[mutual : mutual + oneway]:
        i, j = pairs[d]
        edges.append((i, j) if rng.random() < 0.5 else (j, i))
    return Graph(n, tuple(edges))
