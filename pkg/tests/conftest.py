import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import strategies as st

from hamcore.graph_core import Graph


def random_graph(rng: np.random.Generator, n: int, p: float) -> Graph:
    return Graph(n, [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p])


def from_nx(h) -> Graph:
    h = nx.convert_node_labels_to_integers(h)
    return Graph(h.number_of_nodes(), list(h.edges()))


def atlas(max_n: int = 6) -> list[Graph]:
    """Every graph on at most max_n vertices (up to isomorphism), n >= 1."""
    return [from_nx(h) for h in nx.graph_atlas_g()[1:] if h.number_of_nodes() <= max_n]


def cycle(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def complete(n: int) -> Graph:
    return Graph(n, itertools.combinations(range(n), 2))


@st.composite
def graphs(draw, min_n: int = 1, max_n: int = 9):
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(n, [e for e, keep in zip(pairs, mask) if keep])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
