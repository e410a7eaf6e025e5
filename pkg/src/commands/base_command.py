import sys
from abc import ABC, abstractmethod


class BaseCommand(ABC):
    """Base class for all commands."""

    def __init__(self, run_config):
        self.run_config = run_config
        self.progress = sys.stderr.isatty()

    @staticmethod
    def add_arguments(parser):
        pass

    @abstractmethod
    def run(self, args):
        """Execute the command; returns the process exit code."""

    def cleanup(self):
        pass
