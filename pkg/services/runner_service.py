"""
Runner Service Module - Batch execution for independent work items

The services split long computations (Monte Carlo grid points, search blocks,
per-field scans) into independent tasks. A TrialRunner maps a top-level task
function over those tasks and always returns the results in task order, so the
degree of parallelism never changes an outcome.
"""

import logging
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from enum import Enum
from typing import Callable, List, Sequence

import numpy as np

from services.errors import UsageFailure

logger = logging.getLogger(__name__)

DEFAULT_BATCH_SIZE = 2048


class RunnerKind(str, Enum):
    SERIAL = "serial"
    THREAD = "thread"
    PROCESS = "process"


class TrialRunner:
    """
    Executes task batches serially, on a thread pool, or on a process pool.

    For the process kind the task function must be a module-level function and
    its arguments picklable.
    """

    def __init__(self, workers: int = 1, kind: str = RunnerKind.SERIAL):
        if workers < 1:
            raise UsageFailure(f"workers must be at least 1, got {workers}")
        try:
            self.kind = RunnerKind(kind)
        except ValueError:
            raise UsageFailure(f"unknown runner kind {kind!r}") from None
        self.workers = workers

    def map(self, func: Callable, tasks: Sequence) -> List:
        tasks = list(tasks)
        if self.kind is RunnerKind.SERIAL or self.workers == 1 or len(tasks) <= 1:
            return [func(task) for task in tasks]

        pool_cls = ThreadPoolExecutor if self.kind is RunnerKind.THREAD else ProcessPoolExecutor
        logger.debug("running %d tasks on %d %s workers", len(tasks), self.workers, self.kind.value)
        with pool_cls(max_workers=self.workers) as executor:
            return list(executor.map(func, tasks))

    def __repr__(self) -> str:
        return f"TrialRunner(workers={self.workers}, kind={self.kind.value!r})"


def batch_sizes(total: int, batch_size: int = DEFAULT_BATCH_SIZE) -> List[int]:
    """Split total trials into full batches plus a remainder."""
    if batch_size < 1:
        raise UsageFailure("batch size must be positive")
    full, rest = divmod(total, batch_size)
    return [batch_size] * full + ([rest] if rest else [])


def batch_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one batch, keyed by its position in the run."""
    seq = np.random.SeedSequence(int(master_seed) % 2 ** 64, spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(seq)


def derive_seed(master_seed: int, position: int) -> int:
    """Seed of the code at a position in a comparison, drawn from the master seed."""
    seq = np.random.SeedSequence(int(master_seed) % 2 ** 64, spawn_key=(int(position),))
    return int(seq.generate_state(1, dtype=np.uint64)[0])
