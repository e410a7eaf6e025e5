import argparse
import importlib
import logging

from commands.run_config import RunConfig, help_epilog
from utils.constants import ExitCodes
from utils.errors import ConfigError, GrailError

logger = logging.getLogger(__name__)


class CommandManager:
    def __init__(self):
        self.commands = {}  # command_id -> command class
        self.command_metadata = {}  # command_id -> metadata dict

    def register_command(self, command_id, command_class, metadata=None):
        if command_id in self.commands:
            logger.warning(f"Overwriting existing command with ID '{command_id}'")
        self.commands[command_id] = command_class
        self.command_metadata[command_id] = metadata or {}
        return True

    def register_commands_from_module(self, module_name="commands"):
        module = importlib.import_module(module_name)
        if not hasattr(module, "COMMANDS"):
            logger.error(f"Module '{module_name}' has no COMMANDS attribute")
            return False

        for command_id, command_info in module.COMMANDS.items():
            if isinstance(command_info, tuple) and len(command_info) >= 2:
                command_class, metadata = command_info
                self.register_command(command_id, command_class, metadata)
            else:
                self.register_command(command_id, command_info)
        logger.debug(f"Registered {len(self.commands)} commands from '{module_name}'")
        return len(self.commands) > 0

    def get_command_ids(self):
        return list(self.commands.keys())

    def get_command_metadata(self, command_id):
        return self.command_metadata.get(command_id, {})

    def add_subparsers(self, parser, parents=()):
        subparsers = parser.add_subparsers(dest="command", metavar="command", required=True)
        epilog = help_epilog()
        for command_id, command_class in self.commands.items():
            description = self.get_command_metadata(command_id).get("description")
            sub = subparsers.add_parser(
                command_id,
                help=description,
                description=description,
                epilog=epilog,
                parents=list(parents),
                formatter_class=argparse.RawDescriptionHelpFormatter,
            )
            command_class.add_arguments(sub)
        return subparsers

    def execute(self, command_id, args):
        if command_id not in self.commands:
            logger.error(f"Command '{command_id}' not found")
            return ExitCodes.CONFIG_ERROR

        command = None
        try:
            run_config = RunConfig.load(args.config, seed=args.seed, threads=args.threads)
            command = self.commands[command_id](run_config)
            return command.run(args)
        except (ConfigError, FileNotFoundError) as e:
            logger.error(f"{command_id}: {e}")
            logger.debug("Traceback:", exc_info=True)
            return ExitCodes.CONFIG_ERROR
        except (GrailError, OSError) as e:
            logger.error(f"{command_id}: {e}")
            logger.debug("Traceback:", exc_info=True)
            return ExitCodes.RUNTIME_ERROR
        finally:
            if command is not None:
                try:
                    command.cleanup()
                except Exception as e:
                    logger.error(f"Error cleaning up command '{command_id}': {e}")
