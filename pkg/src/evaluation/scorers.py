import numpy as np

from core.executor import create_executor
from core.subgraph import SubgraphExtractor
from model.gnn import score_triplet
from utils.errors import ConfigError


class Scorer:
    """Maps candidate triples to real scores over a message-passing graph."""

    # size of the relation vocabulary the scorer understands, None if unbounded
    num_relations = None

    def prepare(self, graph):
        self.graph = graph

    def score(self, triples):
        raise NotImplementedError

    def cleanup(self):
        pass


class GrailScorer(Scorer):
    def __init__(self, checkpoint, threads=1, aux_features=None):
        self.checkpoint = checkpoint
        self.params = checkpoint.params
        self.gnn_config = checkpoint.gnn_config
        self.num_relations = len(checkpoint.relations)
        self.aux_features = aux_features
        self.executor = create_executor(threads)
        self.extractor = None

    def prepare(self, graph):
        super().prepare(graph)
        tc = self.checkpoint.train_config
        self.extractor = SubgraphExtractor(graph, tc.hops, tc.mode, tc.labeling, self.aux_features)

    def score(self, triples):
        def one(triple):
            return score_triplet(self.extractor.extract(*triple), self.params.bind(), self.gnn_config).item()

        return np.array(self.executor.map(one, list(triples)), dtype=np.float64)

    def cleanup(self):
        self.executor.cleanup()


class OracleScorer(Scorer):
    def __init__(self, true_triples):
        self.truth = set(tuple(triple) for triple in true_triples)

    def score(self, triples):
        return np.array([1.0 if tuple(triple) in self.truth else 0.0 for triple in triples])


class ConstantScorer(Scorer):
    def __init__(self, value=0.0):
        self.value = float(value)

    def score(self, triples):
        return np.full(len(triples), self.value)


class RandomScorer(Scorer):
    def __init__(self, rng):
        self.rng = rng

    def score(self, triples):
        return self.rng.random(len(triples))


SCORERS = {
    "grail": (GrailScorer, {
        "name": "GraIL",
        "description": "Trained subgraph reasoning network loaded from a checkpoint",
        "needs_checkpoint": True,
    }),
    "oracle": (OracleScorer, {
        "name": "Oracle",
        "description": "Scores 1 for known true triples, 0 otherwise",
        "needs_checkpoint": False,
    }),
    "constant": (ConstantScorer, {
        "name": "Constant",
        "description": "Same score for every triple",
        "needs_checkpoint": False,
    }),
    "random": (RandomScorer, {
        "name": "Random",
        "description": "Uniform random scores from a seeded stream",
        "needs_checkpoint": False,
    }),
}


def create_scorer(name, **kwargs):
    if name not in SCORERS:
        raise ConfigError(f"unknown scorer '{name}' (known: {', '.join(sorted(SCORERS))})")
    scorer_class, _ = SCORERS[name]
    return scorer_class(**kwargs)
