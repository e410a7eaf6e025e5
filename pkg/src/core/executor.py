import logging
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor

logger = logging.getLogger(__name__)


class Executor(ABC):
    """Runs one function over a list of work items, results in input order."""

    def __init__(self, workers=1):
        self.workers = workers

    @abstractmethod
    def map(self, fn, items):
        pass

    def cleanup(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        self.cleanup()
        return False


class SerialExecutor(Executor):
    def __init__(self):
        super().__init__(workers=1)

    def map(self, fn, items):
        return [fn(item) for item in items]


class ThreadedExecutor(Executor):
    def __init__(self, workers):
        super().__init__(workers=workers)
        self.pool = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="grail-worker")

    def map(self, fn, items):
        # pool.map yields in submission order, so reductions stay index-ordered
        return list(self.pool.map(fn, items))

    def cleanup(self):
        self.pool.shutdown(wait=True)


def create_executor(threads=1, deterministic=False):
    if deterministic or threads <= 1:
        return SerialExecutor()
    logger.debug(f"Using {threads} worker threads")
    return ThreadedExecutor(threads)
