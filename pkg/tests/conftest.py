import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from graphfl import Graph
from graphfl.bench import grid_graph, random_sparse_graph


def make_connected(rng: np.random.Generator, max_n: int = 60) -> Graph:
    """A random connected graph from a mix of shapes (trees to dense-ish)."""
    n = int(rng.integers(2, max_n + 1))
    kind = rng.integers(4)
    if kind == 0:  # path
        return Graph(n, [(i, i + 1) for i in range(n - 1)])
    if kind == 1:  # cycle
        return Graph(n, [(i, (i + 1) % n) for i in range(n)])
    if kind == 2:  # small grid
        rows = int(rng.integers(1, 8))
        cols = int(rng.integers(2, 8))
        return grid_graph(rows, cols)
    density = float(rng.uniform(0.0, 0.5))
    sparsity = 1.0 - min(0.9, max((n - 1) / (n * (n - 1) / 2), density))
    return random_sparse_graph(n, sparsity, seed=int(rng.integers(2**32)))


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)
