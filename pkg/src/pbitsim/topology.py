"""Chimera graph construction and queries.

A Chimera graph is a ``rows x cols`` grid of K(t, t) unit cells, ``t`` being
the shore size. Inside a cell every vertical-shore node couples to every
horizontal-shore node. Between cells, vertical node ``k`` couples to vertical
node ``k`` of the cells directly above and below, and horizontal node ``k``
to horizontal node ``k`` of the cells to the left and right.

Node numbering is row-major over the *active* cells (disabled cells are
skipped), vertical shore before horizontal shore, index ascending::

    flat = cell_rank * 2 * t + shore * t + k

where ``cell_rank`` is the position of the cell among active cells and
``shore`` is 0 for vertical, 1 for horizontal.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np

__all__ = [
    "Shore",
    "Color",
    "NodeId",
    "ChimeraTopology",
    "ConfigurationError",
    "build_chimera",
    "chip_topology",
    "neighbors",
    "two_coloring",
]

CHIP_ROWS = 7
CHIP_COLS = 8
CHIP_SHORE = 4


class ConfigurationError(ValueError):
    """Raised for invalid experiment or object configuration."""


class Shore(IntEnum):
    VERTICAL = 0
    HORIZONTAL = 1


class Color(IntEnum):
    A = 0
    B = 1


class NodeId(NamedTuple):
    cell_row: int
    cell_col: int
    shore: Shore
    index: int


@dataclass(frozen=True, eq=False)
class ChimeraTopology:
    """Immutable Chimera graph. Build with :func:`build_chimera`."""

    rows: int
    cols: int
    shore_size: int
    disabled_cells: frozenset

    def __post_init__(self):
        if min(self.rows, self.cols, self.shore_size) < 1:
            raise ConfigurationError("rows, cols and shore_size must be >= 1")
        for cell in self.disabled_cells:
            r, c = cell
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ConfigurationError(f"disabled cell {cell} outside the {self.rows}x{self.cols} grid")

    # -- cells ---------------------------------------------------------
    @cached_property
    def cells(self) -> tuple:
        """Active cells in row-major order."""
        return tuple(
            (r, c)
            for r in range(self.rows)
            for c in range(self.cols)
            if (r, c) not in self.disabled_cells
        )

    @cached_property
    def _cell_rank(self) -> dict:
        return {cell: i for i, cell in enumerate(self.cells)}

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def num_nodes(self) -> int:
        return self.n_cells * 2 * self.shore_size

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def is_active(self, row: int, col: int) -> bool:
        return (0 <= row < self.rows and 0 <= col < self.cols
                and (row, col) not in self.disabled_cells)

    # -- id bijection --------------------------------------------------
    def flat_id(self, node: NodeId) -> int:
        r, c, shore, k = node
        if not 0 <= k < self.shore_size:
            raise IndexError(f"index_in_shore {k} out of range")
        try:
            rank = self._cell_rank[(r, c)]
        except KeyError:
            raise IndexError(f"cell ({r}, {c}) is not an active cell") from None
        return (rank * 2 + int(shore)) * self.shore_size + k

    def node_id(self, flat: int) -> NodeId:
        flat = int(flat)
        if not 0 <= flat < self.num_nodes:
            raise IndexError(f"node {flat} out of range [0, {self.num_nodes})")
        rank, rest = divmod(flat, 2 * self.shore_size)
        shore, k = divmod(rest, self.shore_size)
        r, c = self.cells[rank]
        return NodeId(r, c, Shore(shore), k)

    def _as_flat(self, node) -> int:
        if isinstance(node, tuple):
            return self.flat_id(NodeId(*node))
        node = int(node)
        if not 0 <= node < self.num_nodes:
            raise IndexError(f"node {node} out of range [0, {self.num_nodes})")
        return node

    # -- per-node arrays -----------------------------------------------
    @cached_property
    def node_cell(self) -> np.ndarray:
        """Cell rank of every node."""
        return np.repeat(np.arange(self.n_cells), 2 * self.shore_size)

    @cached_property
    def node_shore(self) -> np.ndarray:
        per_cell = np.repeat([0, 1], self.shore_size)
        return np.tile(per_cell, self.n_cells)

    @cached_property
    def node_index(self) -> np.ndarray:
        return np.tile(np.arange(self.shore_size), 2 * self.n_cells)

    # -- edges ---------------------------------------------------------
    @cached_property
    def _adjacency(self) -> tuple:
        # per node: intra-cell neighbours (ascending), then inter-cell
        # neighbours (vertical shore: up, down; horizontal shore: left, right)
        t = self.shore_size
        adj = []
        for u in range(self.num_nodes):
            r, c, shore, k = self.node_id(u)
            other = Shore(1 - shore)
            nbrs = [self.flat_id(NodeId(r, c, other, j)) for j in range(t)]
            if shore == Shore.VERTICAL:
                steps = ((r - 1, c), (r + 1, c))
            else:
                steps = ((r, c - 1), (r, c + 1))
            for rr, cc in steps:
                if self.is_active(rr, cc):
                    nbrs.append(self.flat_id(NodeId(rr, cc, shore, k)))
            adj.append(tuple(nbrs))
        return tuple(adj)

    @cached_property
    def edges(self) -> np.ndarray:
        """``(E, 2)`` int array of undirected edges ``(a, b)`` with ``a < b``,
        sorted lexicographically. Row position is the edge id."""
        pairs = sorted(
            (u, v) for u, nbrs in enumerate(self._adjacency) for v in nbrs if u < v
        )
        out = np.array(pairs, dtype=np.int64).reshape(-1, 2)
        out.setflags(write=False)
        return out

    @cached_property
    def _edge_index(self) -> dict:
        return {(int(a), int(b)): i for i, (a, b) in enumerate(self.edges)}

    def edge_id(self, a: int, b: int) -> int:
        a, b = (a, b) if a < b else (b, a)
        try:
            return self._edge_index[(a, b)]
        except KeyError:
            raise KeyError(f"({a}, {b}) is not an edge of the topology") from None

    @cached_property
    def csr(self) -> tuple:
        """``(indptr, neighbor, edge)`` arrays in :func:`neighbors` order."""
        indptr = np.zeros(self.num_nodes + 1, dtype=np.int64)
        nbr, eid = [], []
        for u, nbrs in enumerate(self._adjacency):
            indptr[u + 1] = indptr[u] + len(nbrs)
            nbr.extend(nbrs)
            eid.extend(self.edge_id(u, v) for v in nbrs)
        return indptr, np.array(nbr, dtype=np.int64), np.array(eid, dtype=np.int64)

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "shore_size": self.shore_size,
            "disabled_cells": sorted([list(c) for c in self.disabled_cells]),
        }


def build_chimera(rows: int = CHIP_ROWS, cols: int = CHIP_COLS,
                  shore_size: int = CHIP_SHORE,
                  disabled_cells: Iterable = ()) -> ChimeraTopology:
    """Build a Chimera topology.

    Parameters
    ----------
    rows, cols : int
        Unit-cell grid dimensions.
    shore_size : int
        Nodes per shore; a unit cell is K(shore_size, shore_size).
    disabled_cells : iterable of (row, col)
        Cells that carry no p-bits. Their nodes and incident edges are absent.

    Raises
    ------
    ConfigurationError
        For non-positive sizes or a disabled cell outside the grid.
    """
    cells = frozenset((int(r), int(c)) for r, c in disabled_cells)
    return ChimeraTopology(int(rows), int(cols), int(shore_size), cells)


def chip_topology(disabled_cell=(0, 0)) -> ChimeraTopology:
    """The 440-spin chip fabric: 7x8 cells of K(4,4) with one cell removed."""
    return build_chimera(CHIP_ROWS, CHIP_COLS, CHIP_SHORE, [disabled_cell])


def neighbors(topology: ChimeraTopology, node) -> list:
    """Neighbours of ``node`` as ``(neighbor_flat_id, edge_id)`` pairs.

    Intra-cell neighbours come first in ascending index order, followed by
    inter-cell neighbours (up, down for vertical nodes; left, right for
    horizontal nodes). ``node`` may be a flat id or a :class:`NodeId`.
    """
    u = topology._as_flat(node)
    indptr, nbr, eid = topology.csr
    s = slice(indptr[u], indptr[u + 1])
    return [(int(v), int(e)) for v, e in zip(nbr[s], eid[s])]


def two_coloring(topology: ChimeraTopology) -> np.ndarray:
    """Proper two-colouring: ``shore XOR ((cell_row + cell_col) mod 2)``.

    Returns an int array of :class:`Color` values indexed by flat node id.
    """
    rc = np.array(topology.cells, dtype=np.int64).reshape(-1, 2)
    parity = (rc[:, 0] + rc[:, 1]) % 2
    return topology.node_shore ^ parity[topology.node_cell]
