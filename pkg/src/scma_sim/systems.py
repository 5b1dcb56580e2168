"""Bundled system configurations: codebook set plus factor graph per name.

The 6x4 system is the bundled table2 file.  The 8x4 and 9x6 sets are
constructed here (no published codebooks exist at those sizes): regular
N = 2 footprints from `factor_graph.builtin_graph_matrix`, with each
resource's colliding users assigned distinct constellations.  The 9x6
system reuses the designed 6x4 constellation triple, so its per-resource
collision geometry matches the 6x4 system and differences come from the
graph alone; the 8x4 system needs four constellations per resource and
uses PAM rotated in 45-degree steps.  Amplitudes are scaled to match the
table2 convention.
"""

from __future__ import annotations

import numpy as np

from scma_sim import design
from scma_sim.codebook import CodebookSet, load_builtin, load_codebook_file
from scma_sim.factor_graph import FactorGraph, builtin_graph_matrix, from_codebook_set

__all__ = ["SYSTEM_NAMES", "builtin_codebook_set", "build_system", "table2_amplitude_scale"]

SYSTEM_NAMES = ("6x4", "8x4", "9x6")

# Ratio between the bundled table2 and table1 entries; constructed sets use
# it so all systems run at a comparable codeword amplitude.
TABLE2_SCALE = 1.2078


def table2_amplitude_scale() -> float:
    return TABLE2_SCALE


def _labels_from_graph(f: np.ndarray) -> np.ndarray:
    """Assign each resource's colliding users the labels 1..d_f in ascending
    user order, giving a proper per-resource constellation coloring."""
    labels = np.zeros_like(f, dtype=int)
    for k in range(f.shape[0]):
        for idx, j in enumerate(np.flatnonzero(f[k])):
            labels[k, j] = idx + 1
    return labels


# Constellation labels per cell for the 9x6 system: every resource sees all
# three constellations, and every user pairs two different ones (the same
# structure the 6x4 design has, so per-user codeword geometry carries over).
_LABELS_9X6 = (
    (1, 0, 0, 2, 0, 0, 3, 0, 0),
    (2, 0, 0, 0, 1, 0, 0, 3, 0),
    (0, 1, 0, 3, 0, 0, 0, 0, 2),
    (0, 3, 0, 0, 0, 2, 1, 0, 0),
    (0, 0, 3, 0, 2, 0, 0, 0, 1),
    (0, 0, 1, 0, 0, 3, 0, 2, 0),
)

# Point order balancing the codeword energies when constellation 2 shares a
# codebook with constellation 3 (sorts the points by real part); this is the
# pairing the bundled tables use.
_LABEL2_BALANCED = (3, 1, 4, 2)


def _balanced_cell_orders(labels: np.ndarray) -> dict:
    orders = {}
    for j in range(labels.shape[1]):
        cells = {int(labels[k, j]): k for k in range(labels.shape[0]) if labels[k, j]}
        if set(cells) == {2, 3}:
            orders[(cells[2] + 1, j + 1)] = _LABEL2_BALANCED
    return orders


def _constructed_set(name: str) -> CodebookSet:
    f = builtin_graph_matrix(name)
    df = int(f.sum(axis=1)[0])
    if name == "9x6":
        base = design.bundled_constellations()
        cs = [design.UserConstellation(c.points * TABLE2_SCALE, label=c.label)
              for c in base]
        labels = np.array(_LABELS_9X6)
        indicator = design.IndicatorMatrix(
            labels=labels, cell_orders=_balanced_cell_orders(labels))
    else:
        pam = design.pam_mother(4)
        cs = [design.UserConstellation(
            pam.points * TABLE2_SCALE * np.exp(1j * np.deg2rad(45.0 * t)),
            label=t + 1) for t in range(df)]
        indicator = design.IndicatorMatrix(labels=_labels_from_graph(f))
    return design.assemble_codebooks(cs, indicator)


def builtin_codebook_set(name: str) -> CodebookSet:
    if name == "6x4":
        return load_builtin("table2")
    if name in SYSTEM_NAMES:
        return _constructed_set(name)
    raise ValueError(f"unknown system {name!r}, expected one of {SYSTEM_NAMES}")


def build_system(name: str, codebook_path=None) -> tuple[CodebookSet, FactorGraph]:
    """Resolve a system name (or explicit codebook file) to (set, graph)."""
    if codebook_path is not None:
        cbs = load_codebook_file(codebook_path)
    else:
        cbs = builtin_codebook_set(name)
    return cbs, from_codebook_set(cbs)
