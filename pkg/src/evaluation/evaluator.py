import csv
import logging
from dataclasses import dataclass, field

from tqdm import tqdm

from benchgen.sampler import split_test_edges
from evaluation.metrics import auc_pr, hits_at, mean_rank, rank_from_scores
from training.trainer import sample_negative
from utils.constants import EvalConstants as EC
from utils.constants import TrainConstants as TC
from utils.errors import ConfigError, EvaluationError
from utils.rng import substream

logger = logging.getLogger(__name__)


@dataclass
class EvalConfig:
    num_negatives: int = EC.NUM_NEGATIVES
    hits_at: int = EC.HITS_AT
    seed: int = TC.SEED

    def validate(self):
        if self.num_negatives < 1:
            raise ConfigError(f"num_negatives must be >= 1, got {self.num_negatives}")
        if self.hits_at < 1:
            raise ConfigError(f"hits_at must be >= 1, got {self.hits_at}")


@dataclass
class TripletRecord:
    triple: tuple
    score: float
    rank: int
    negatives: list


@dataclass
class EvalReport:
    auc_pr: float
    hits: float
    hits_at: int
    num_negatives: int
    seed: int
    records: list = field(default_factory=list)
    # (triple, score, label) rows behind auc_pr
    classification: list = field(default_factory=list)

    @property
    def hits_at_10(self):
        return self.hits if self.hits_at == 10 else hits_at([r.rank for r in self.records], 10)

    @property
    def ranks(self):
        return [record.rank for record in self.records]

    def summary(self):
        return {
            "auc_pr": repr(self.auc_pr),
            f"hits_at_{self.hits_at}": repr(self.hits),
            "mean_rank": repr(mean_rank(self.ranks)),
            "num_test": str(len(self.records)),
            "num_negatives": str(self.num_negatives),
            "seed": str(self.seed),
        }

    def write(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for key, value in self.summary().items():
                f.write(f"{key}={value}\n")

    def write_csv(self, path, g):
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["head", "relation", "tail", "score", "rank", "num_negatives"])
            for record in self.records:
                writer.writerow([*g.labeled(record.triple), repr(record.score), record.rank, len(record.negatives)])

    def write_scores(self, path, g):
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for triple, score, _ in self.classification:
                f.write("\t".join([*g.labeled(triple), repr(score)]) + "\n")

    def write_labels(self, path, g):
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for triple, _, label in self.classification:
                f.write("\t".join([*g.labeled(triple), str(label)]) + "\n")


def check_relations(scorer, g, test_edges):
    """Every relation the scorer will see, test edges and message edges alike, must be known to it."""
    if scorer.num_relations is None:
        return
    used = {r for _, r, _ in test_edges} | {r for _, r, _ in g.triples}
    unknown = sorted(r for r in used if r >= scorer.num_relations)
    if unknown:
        names = ", ".join(g.relations.label_of(r) for r in unknown)
        raise EvaluationError(f"relations unknown to the model: {names}")


def evaluate(scorer, g, test_edges, cfg, progress=False):
    """Classification and ranking metrics for `test_edges` over `g`.

    The test edges are withdrawn from `g` before any scoring, so no test edge
    ever carries messages.
    """
    cfg.validate()
    test_edges = [tuple(edge) for edge in test_edges]
    if not test_edges:
        raise EvaluationError("no test edges to evaluate")
    for h, r, t in test_edges:
        g.check_entity(h)
        g.check_entity(t)
        g.check_relation(r)
        if h == t:
            raise EvaluationError(f"test edge {g.labeled((h, r, t))} is a self-loop and cannot be scored")
    check_relations(scorer, g, test_edges)

    message_graph = g.without_triples(test_edges)
    scorer.prepare(message_graph)
    logger.info(f"Evaluating {len(test_edges)} test edges over a message graph of {message_graph.num_triples} triples")

    auc_rng = substream(cfg.seed, "eval", "auc")
    auc_negatives = [sample_negative(g, edge, auc_rng, allow_self_loops=False) for edge in test_edges]
    pos_scores = scorer.score(test_edges)
    neg_scores = scorer.score(auc_negatives)
    auc = auc_pr(pos_scores, neg_scores)
    classification = [(edge, float(s), 1) for edge, s in zip(test_edges, pos_scores)]
    classification += [(edge, float(s), 0) for edge, s in zip(auc_negatives, neg_scores)]

    rank_rng = substream(cfg.seed, "eval", "rank")
    records = []
    for idx, edge in enumerate(tqdm(test_edges, desc="ranking", disable=not progress)):
        negatives = [sample_negative(g, edge, rank_rng, allow_self_loops=False) for _ in range(cfg.num_negatives)]
        scores = scorer.score(negatives)
        rank = rank_from_scores(pos_scores[idx], scores)
        records.append(TripletRecord(edge, float(pos_scores[idx]), rank, negatives))

    report = EvalReport(auc, hits_at([r.rank for r in records], cfg.hits_at), cfg.hits_at, cfg.num_negatives, cfg.seed, records, classification)
    logger.info(f"AUC-PR {report.auc_pr:.4f}, Hits@{cfg.hits_at} {report.hits:.4f}")
    return report


def rank_triplet(scorer, triple, g, num_negatives, rng):
    """Rank of `triple` among `num_negatives` sampled corruptions."""
    negatives = [sample_negative(g, triple, rng, allow_self_loops=False) for _ in range(num_negatives)]
    scores = scorer.score([tuple(triple)] + negatives)
    return rank_from_scores(scores[0], scores[1:])


def evaluate_transductive(scorer, g_train, cfg, fraction=EC.TRANSDUCTIVE_FRACTION, progress=False):
    """Hold out a fraction of the training graph's own links and evaluate on them."""
    _, test_edges = split_test_edges(g_train, fraction, substream(cfg.seed, "eval", "transductive"))
    return evaluate(scorer, g_train, test_edges, cfg, progress=progress)
