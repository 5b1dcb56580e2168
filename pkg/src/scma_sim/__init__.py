"""Link-level SCMA simulator: codebooks, message-passing detection, codebook
design utilities, hybrid SCMA + power-domain access, and a Monte Carlo SER
harness with a command line front end (``scma-sim``)."""

from scma_sim import channel, codebook, design, factor_graph, harness, hma, mpa, systems
from scma_sim.codebook import CodebookSet, encode, load_builtin, load_codebook_set, superpose
from scma_sim.factor_graph import FactorGraph, from_codebook_set, from_matrix
from scma_sim.mpa import DetectorConfig, detect, detect_batch

__all__ = [
    "channel",
    "codebook",
    "design",
    "factor_graph",
    "harness",
    "hma",
    "mpa",
    "systems",
    "CodebookSet",
    "encode",
    "load_builtin",
    "load_codebook_set",
    "superpose",
    "FactorGraph",
    "from_codebook_set",
    "from_matrix",
    "DetectorConfig",
    "detect",
    "detect_batch",
]

__version__ = "0.1.0"
