import logging
import os

from commands.base_command import BaseCommand
from core.graph import KnowledgeGraph, Vocabulary, read_labeled_file
from core.subgraph import load_aux_features
from evaluation.evaluator import evaluate, evaluate_transductive
from evaluation.scorers import SCORERS, create_scorer
from training.checkpoint import load_checkpoint
from utils.constants import ExitCodes
from utils.errors import ConfigError, GraphFormatError
from utils.rng import substream

logger = logging.getLogger(__name__)

REPORT_FILE = "report.txt"
RANKS_FILE = "ranks.csv"
SCORES_FILE = "scores.tsv"
LABELS_FILE = "labels.tsv"


class EvalCommand(BaseCommand):
    def __init__(self, run_config):
        super().__init__(run_config)
        self.scorer = None

    @staticmethod
    def add_arguments(parser):
        parser.add_argument("--checkpoint", help="Trained model (required by the grail scorer)")
        parser.add_argument("--graph", required=True, help="Graph the test edges are scored over")
        parser.add_argument("--test", help="Test triples file")
        parser.add_argument("--out-dir", required=True, help="Directory for the report files")
        parser.add_argument("--scorer", default="grail", choices=sorted(SCORERS), help="Scoring model")
        parser.add_argument("--transductive", action="store_true", help="Hold out links of --graph itself instead of reading --test")

    def _create_scorer(self, name, checkpoint, g):
        rc = self.run_config
        if name == "grail":
            aux = load_aux_features(rc.aux_features, g) if rc.aux_features else None
            return create_scorer(name, checkpoint=checkpoint, threads=rc.train.threads, aux_features=aux)
        if name == "oracle":
            return create_scorer(name, true_triples=g.triples)
        if name == "random":
            return create_scorer(name, rng=substream(rc.seed, "eval", "random"))
        return create_scorer(name)

    def run(self, args):
        rc = self.run_config
        _, metadata = SCORERS[args.scorer]
        if metadata["needs_checkpoint"] and not args.checkpoint:
            raise ConfigError(f"--checkpoint is required for the {args.scorer} scorer")
        if not args.transductive and not args.test:
            raise ConfigError("--test is required unless --transductive is given")

        checkpoint = load_checkpoint(args.checkpoint) if args.checkpoint else None
        relations = Vocabulary(checkpoint.relations) if checkpoint is not None else None
        graph_triples = read_labeled_file(args.graph)
        if not graph_triples:
            raise GraphFormatError(f"{args.graph}: no triples found")
        test_triples = [] if args.transductive else read_labeled_file(args.test)

        g = KnowledgeGraph.from_labeled(graph_triples + test_triples, relations=relations)
        test_edges = g.encode_triples(test_triples)

        self.scorer = self._create_scorer(args.scorer, checkpoint, g)
        if args.transductive:
            report = evaluate_transductive(self.scorer, g, rc.eval, rc.transductive_fraction, progress=self.progress)
        else:
            report = evaluate(self.scorer, g, test_edges, rc.eval, progress=self.progress)

        os.makedirs(args.out_dir, exist_ok=True)
        report.write(os.path.join(args.out_dir, REPORT_FILE))
        report.write_csv(os.path.join(args.out_dir, RANKS_FILE), g)
        report.write_scores(os.path.join(args.out_dir, SCORES_FILE), g)
        report.write_labels(os.path.join(args.out_dir, LABELS_FILE), g)
        logger.info(f"Wrote evaluation report to {args.out_dir}")
        return ExitCodes.OK

    def cleanup(self):
        if self.scorer is not None:
            self.scorer.cleanup()
