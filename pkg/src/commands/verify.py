from commands.base_command import BaseCommand
from logic.verify import verify_rule_encoding
from utils.constants import ExitCodes
from utils.constants import VerifierConstants as VC
from utils.errors import ConfigError
from utils.rng import substream


class VerifyCommand(BaseCommand):
    @staticmethod
    def add_arguments(parser):
        parser.add_argument("--trials", type=int, default=1000, help="Random graphs to check")
        parser.add_argument("--max-rule-len", type=int, default=VC.MAX_RULE_LENGTH, help="Longest rule body sampled")
        parser.add_argument("--out", required=True, help="Report file")

    def run(self, args):
        if args.trials < 0:
            raise ConfigError(f"--trials must be >= 0, got {args.trials}")
        rng = substream(self.run_config.seed, "verify")
        report = verify_rule_encoding(args.trials, args.max_rule_len, rng, progress=self.progress)
        report.write(args.out)
        return ExitCodes.OK if report.passed else ExitCodes.RUNTIME_ERROR
