import csv
import logging
import os

from commands.base_command import BaseCommand
from core.graph import Vocabulary, read_labeled_file, read_triples_file
from core.subgraph import load_aux_features
from training.checkpoint import load_checkpoint, save_checkpoint
from training.events import EventHub, TrainingEvent
from training.trainer import train
from utils.constants import CheckpointConstants as CC
from utils.constants import ExitCodes

logger = logging.getLogger(__name__)


def best_path_for(resume_path):
    if resume_path.endswith(CC.LAST_SUFFIX):
        return resume_path[: -len(CC.LAST_SUFFIX)]
    return None


class TrainCommand(BaseCommand):
    def __init__(self, run_config):
        super().__init__(run_config)
        self.loss_log = None

    @staticmethod
    def add_arguments(parser):
        parser.add_argument("--train", required=True, help="Training graph file")
        parser.add_argument("--valid", required=True, help="Validation triples file")
        parser.add_argument("--out", required=True, help="Best checkpoint path; the latest epoch goes to <out>.last")
        parser.add_argument("--from-checkpoint", help="Resume from a <out>.last checkpoint")
        parser.add_argument("--loss-log", help="CSV loss log (default <out>.loss.csv)")

    def run(self, args):
        rc = self.run_config
        resume = resume_best = None
        relations = None
        if args.from_checkpoint:
            resume = load_checkpoint(args.from_checkpoint)
            relations = Vocabulary(resume.relations)
            best_path = best_path_for(args.from_checkpoint)
            if best_path and os.path.isfile(best_path):
                resume_best = load_checkpoint(best_path)

        g = read_triples_file(args.train, relations=relations)
        valid = g.encode_triples(read_labeled_file(args.valid))
        aux = load_aux_features(rc.aux_features, g) if rc.aux_features else None

        last_path = args.out + CC.LAST_SUFFIX
        log_path = args.loss_log or args.out + CC.LOSS_LOG_SUFFIX
        appending = resume is not None and os.path.isfile(log_path)
        self.loss_log = open(log_path, "a" if appending else "w", encoding="utf-8", newline="")
        writer = csv.writer(self.loss_log, lineterminator="\n")
        if not appending:
            writer.writerow(["epoch", "loss", "val_auc_pr"])

        def on_epoch_end(record, checkpoint):
            writer.writerow([record.epoch, repr(record.loss), repr(record.val_auc_pr)])
            self.loss_log.flush()
            save_checkpoint(checkpoint, last_path)

        def on_new_best(checkpoint):
            save_checkpoint(checkpoint, args.out)

        events = EventHub()
        events.register_callback(TrainingEvent.EPOCH_END, on_epoch_end)
        events.register_callback(TrainingEvent.NEW_BEST, on_new_best)

        result = train(g, valid, rc.train, rc.gnn, aux, events, resume, resume_best, progress=self.progress)
        save_checkpoint(result.best, args.out)
        save_checkpoint(result.last, last_path)
        logger.info(f"Best checkpoint (epoch {result.best.epoch}) written to {args.out}")
        return ExitCodes.OK

    def cleanup(self):
        if self.loss_log is not None:
            self.loss_log.close()
