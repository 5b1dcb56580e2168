import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from scma_sim.codebook import load_builtin
from scma_sim.factor_graph import from_codebook_set


@pytest.fixture(scope="session")
def table2():
    return load_builtin("table2")


@pytest.fixture(scope="session")
def table1():
    return load_builtin("table1")


@pytest.fixture(scope="session")
def graph_6x4(table2):
    return from_codebook_set(table2)


@pytest.fixture()
def rng():
    return np.random.default_rng(2024)
