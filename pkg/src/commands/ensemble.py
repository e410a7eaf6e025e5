import logging
import os

import numpy as np

from commands.base_command import BaseCommand
from evaluation.fusion import gain_table, late_fusion, read_label_file, read_score_file, write_gain_table, write_score_file
from utils.constants import ExitCodes

logger = logging.getLogger(__name__)


def read_method_rows(paths):
    """Rows of one method; comma-joined files are concatenated in order."""
    rows = []
    for path in paths.split(","):
        rows += read_score_file(path)
    return rows


def default_gains_path(out):
    root, _ = os.path.splitext(out)
    return root + ".gains.txt"


class EnsembleCommand(BaseCommand):
    @staticmethod
    def add_arguments(parser):
        parser.add_argument(
            "--scores", nargs="+", required=True,
            help="One entry per method: a score file, or comma-joined files (validation rows first)",
        )
        parser.add_argument("--valid-labels", required=True, help="Labels of the leading validation rows")
        parser.add_argument("--test-labels", help="Labels of the remaining rows, used for the gain table")
        parser.add_argument("--out", required=True, help="Fused score file")
        parser.add_argument("--gains", help="Gain table file (default <out>.gains.txt)")

    def run(self, args):
        method_rows = [read_method_rows(paths) for paths in args.scores]
        valid_labels = read_label_file(args.valid_labels)
        test_labels = read_label_file(args.test_labels) if args.test_labels else None

        result = late_fusion(method_rows, valid_labels, self.run_config.fusion)
        keys = [key for key, _ in valid_labels] + list(result.test_keys)
        write_score_file(args.out, keys, np.concatenate([result.valid_scores, result.test_scores]))

        table = gain_table(method_rows, result, valid_labels, test_labels)
        gains_path = args.gains or default_gains_path(args.out)
        write_gain_table(gains_path, table)
        logger.info(f"Fused AUC-PR on {table['split']}: {table['rows'][-1][1]:.4f}, gain {table['gain']:.4f}")
        return ExitCodes.OK
