"""Bundled reference detection scenario used as a golden regression fixture.

One fixed transmission on the table2 codebooks: known data symbols, unit
gains and powers, a frozen noise draw at 3 dB.  `trace_lines` renders the
full detection pipeline (received vector, per-iteration message matrices,
posterior, decisions) in the block layout used for debugging dumps.
"""

from __future__ import annotations

import numpy as np

from scma_sim import mpa
from scma_sim.codebook import CodebookSet, encode, load_builtin, superpose
from scma_sim.factor_graph import FactorGraph, from_codebook_set

__all__ = ["REFERENCE_SYMBOLS", "REFERENCE_NOISE", "REFERENCE_N0",
           "reference_scenario", "trace_lines"]

REFERENCE_SYMBOLS = (2, 2, 1, 1, 3, 4)
REFERENCE_NOISE = np.array([
    0.0018 - 1.2008j,
    1.2143 + 0.4227j,
    0.3323 + 0.4232j,
    0.1488 - 0.6993j,
])
REFERENCE_N0 = 0.5012  # 3 dB operating point


def reference_scenario() -> tuple[CodebookSet, FactorGraph, np.ndarray, np.ndarray]:
    """(codebooks, graph, superposed codewords r, received vector y)."""
    cbs = load_builtin("table2")
    fg = from_codebook_set(cbs)
    powers = np.ones(cbs.user_count)
    cws = [encode(cbs, j + 1, s) for j, s in enumerate(REFERENCE_SYMBOLS)]
    r = superpose(cws, powers)
    y = r + REFERENCE_NOISE
    return cbs, fg, r, y


def _format_vector(name: str, vec: np.ndarray) -> list[str]:
    lines = [f"{name}:"]
    for z in vec:
        sign = "+" if z.imag >= 0 else "-"
        lines.append(f"  {z.real:8.4f} {sign} {abs(z.imag):6.4f}i")
    return lines


def trace_lines(max_iterations: int = 1) -> list[str]:
    """Full detection trace of the reference scenario, one string per line."""
    cbs, fg, r, y = reference_scenario()
    powers = np.ones(cbs.user_count)
    out = []
    out += _format_vector("superposed codewords r", r)
    out += _format_vector("noise n", REFERENCE_NOISE)
    out += _format_vector("received y = r + n", y)
    out.append(f"N0 = {REFERENCE_N0}")

    state = mpa.initialize(fg, cbs.modulation_order)
    out.append("")
    out.append("initial V (uniform on graph edges):")
    out.append(mpa.format_message_matrix(state.v, fg))
    for it in range(1, max_iterations + 1):
        mpa.resource_update(state, fg, cbs, y, 1.0, powers, REFERENCE_N0)
        out.append("")
        out.append(f"iteration {it}: resource-to-user messages U:")
        out.append(mpa.format_message_matrix(state.u, fg))
        mpa.user_update(state, fg)
        out.append("")
        out.append(f"iteration {it}: user-to-resource messages V:")
        out.append(mpa.format_message_matrix(state.v, fg))
    post = mpa.compute_posterior(state, fg)
    out.append("")
    out.append("posterior (users as columns):")
    for mi in range(cbs.modulation_order):
        out.append(" ".join(f"{post[j, mi]:8.4f}" for j in range(cbs.user_count)))
    decisions = mpa.decide(post)
    out.append("")
    out.append("decisions: " + " ".join(str(int(s)) for s in decisions))
    out.append("transmitted: " + " ".join(str(s) for s in REFERENCE_SYMBOLS))
    return out
