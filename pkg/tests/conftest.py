import numpy as np
import pytest

from core.graph import load_triples
from core.subgraph import LabeledSubgraph, label_nodes


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def chain_graph():
    # a - b - c - d, all r1
    return load_triples("a\tr1\tb\nb\tr1\tc\nc\tr1\td\n")


@pytest.fixture
def pruning_graph():
    # u->a (r1), a->v (r2), u->b (r1), b->c (r2)
    return load_triples("u\tr1\ta\na\tr2\tv\nu\tr1\tb\nb\tr2\tc\n")


@pytest.fixture
def make_subgraph():
    """Labeled subgraph over local ids 0..n-1 with targets 0 -> 1."""

    def build(num_nodes, edges, r_t=0, k=2):
        sub = LabeledSubgraph(list(range(num_nodes)), list(edges) + [(0, r_t, 1)], (0, r_t, 1), k)
        return label_nodes(sub, k)

    return build
