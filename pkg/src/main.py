import argparse
import logging
import sys

from core.command_manager import CommandManager
from utils.constants import ExitCodes

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def common_arguments():
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", help="key=value run configuration file")
    parser.add_argument("--seed", type=int, help="Seed for every random stream (overrides the config file)")
    parser.add_argument("--threads", type=int, help="Worker threads; 1 is the reference path")
    parser.add_argument("-d", "--debug", action="store_true", help="Enable debug logging")
    return parser


def parse_args(command_manager, argv=None):
    parser = argparse.ArgumentParser(description="Inductive link prediction by subgraph reasoning")
    command_manager.add_subparsers(parser, parents=[common_arguments()])
    return parser.parse_args(argv)


def setup_logging(debug=False):
    logging.basicConfig(level=logging.DEBUG if debug else logging.INFO, format=LOG_FORMAT, stream=sys.stderr)


def main(argv=None):
    command_manager = CommandManager()
    if not command_manager.register_commands_from_module("commands"):
        print("Error: No commands available", file=sys.stderr)
        return ExitCodes.RUNTIME_ERROR

    args = parse_args(command_manager, argv)
    setup_logging(args.debug)
    return command_manager.execute(args.command, args)


if __name__ == "__main__":
    sys.exit(main())
