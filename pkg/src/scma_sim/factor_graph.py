"""Bipartite user/resource graph built from the K x J binary footprint matrix.

Row k of the matrix marks which users collide on resource k; column j marks
which resources user j occupies.  The detector only ever needs the two
neighborhood views, so that is all this module exposes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FactorGraph",
    "from_matrix",
    "from_codebook_set",
    "parse_matrix_text",
    "overloading_factor",
    "builtin_graph_matrix",
]


@dataclass(frozen=True, eq=False)
class FactorGraph:
    f_matrix: np.ndarray                      # (K, J) int8, read-only
    resource_neighbors: tuple[tuple[int, ...], ...]  # users per resource, 1-based
    user_neighbors: tuple[tuple[int, ...], ...]      # resources per user, 1-based

    @property
    def resource_count(self) -> int:
        return self.f_matrix.shape[0]

    @property
    def user_count(self) -> int:
        return self.f_matrix.shape[1]

    @property
    def edge_count(self) -> int:
        return int(self.f_matrix.sum())

    def is_edge(self, resource: int, user: int) -> bool:
        return bool(self.f_matrix[resource - 1, user - 1])


def from_matrix(f) -> FactorGraph:
    """Build a FactorGraph from a K x J 0/1 matrix.

    Rejects non-binary entries and all-zero rows or columns; neighbor sets
    are kept in ascending index order so iteration is deterministic.
    """
    fm = np.asarray(f)
    if fm.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {fm.shape}")
    if not np.isin(fm, (0, 1)).all():
        raise ValueError("matrix entries must be 0 or 1")
    fm = fm.astype(np.int8)
    if (fm.sum(axis=1) == 0).any():
        k = int(np.flatnonzero(fm.sum(axis=1) == 0)[0]) + 1
        raise ValueError(f"resource row {k} has no users")
    if (fm.sum(axis=0) == 0).any():
        j = int(np.flatnonzero(fm.sum(axis=0) == 0)[0]) + 1
        raise ValueError(f"user column {j} has no resources")
    resource_neighbors = tuple(
        tuple(int(j) + 1 for j in np.flatnonzero(row)) for row in fm)
    user_neighbors = tuple(
        tuple(int(k) + 1 for k in np.flatnonzero(col)) for col in fm.T)
    fm.flags.writeable = False
    return FactorGraph(fm, resource_neighbors, user_neighbors)


def from_codebook_set(cbs) -> FactorGraph:
    """Graph induced by a CodebookSet's sparsity pattern."""
    return from_matrix(cbs.sparsity_matrix())


def parse_matrix_text(text: str) -> np.ndarray:
    """Parse a standalone binary-matrix block: one row per line, 0/1 tokens."""
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append([int(t) for t in line.split()])
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise ValueError("matrix rows are missing or ragged")
    return np.array(rows, dtype=np.int8)


def overloading_factor(fg: FactorGraph) -> float:
    """Users per resource as a percentage, 100 * J / K."""
    return 100.0 * fg.user_count / fg.resource_count


# 6 users on 4 resources (150% load): every pair of resources hosts one user,
# three users collide per resource.  This is the pattern the bundled
# table1/table2 codebooks follow.
_F_6X4 = (
    (1, 0, 1, 0, 1, 0),
    (0, 1, 1, 0, 0, 1),
    (1, 0, 0, 1, 0, 1),
    (0, 1, 0, 1, 1, 0),
)

# Constructed regular patterns for the larger systems (no published matrices
# exist for these sizes): N = 2 resources per user, d_f = J * N / K users per
# resource.  Degree counts are asserted by the test suite.
_F_8X4 = (
    (1, 0, 1, 0, 1, 0, 1, 0),
    (1, 0, 0, 1, 0, 1, 1, 0),
    (0, 1, 1, 0, 0, 1, 0, 1),
    (0, 1, 0, 1, 1, 0, 0, 1),
)

_F_9X6 = (
    (1, 0, 0, 1, 0, 0, 1, 0, 0),
    (1, 0, 0, 0, 1, 0, 0, 1, 0),
    (0, 1, 0, 1, 0, 0, 0, 0, 1),
    (0, 1, 0, 0, 0, 1, 1, 0, 0),
    (0, 0, 1, 0, 1, 0, 0, 0, 1),
    (0, 0, 1, 0, 0, 1, 0, 1, 0),
)

_BUILTIN = {"6x4": _F_6X4, "8x4": _F_8X4, "9x6": _F_9X6}


def builtin_graph_matrix(name: str) -> np.ndarray:
    """Footprint matrix of a bundled system ('6x4', '8x4' or '9x6')."""
    if name not in _BUILTIN:
        raise ValueError(f"unknown system {name!r}, expected one of {sorted(_BUILTIN)}")
    return np.array(_BUILTIN[name], dtype=np.int8)
