import logging

from benchgen.sampler import make_split, write_split
from commands.base_command import BaseCommand
from core.graph import read_triples_file
from utils.constants import ExitCodes

logger = logging.getLogger(__name__)


class SplitCommand(BaseCommand):
    @staticmethod
    def add_arguments(parser):
        parser.add_argument("--input", required=True, help="Source knowledge graph (head<TAB>relation<TAB>tail)")
        parser.add_argument("--out-dir", required=True, help="Directory for the split files")

    def run(self, args):
        rc = self.run_config
        g = read_triples_file(args.input)
        split = make_split(g, rc.train_sampler, rc.test_sampler, rc.split)
        write_split(args.out_dir, split)
        return ExitCodes.OK
