import abc
import os
from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from typing import TypeVar

from loguru import logger

from .exceptions import ConfigurationError

T = TypeVar("T")


class TrialExecutor(abc.ABC):
    @abc.abstractmethod
    def map(self, fn: Callable[[int], T], trial_ids: Iterable[int]) -> list[T]:
        pass

class SerialExecutor(TrialExecutor):
    def map(self, fn: Callable[[int], T], trial_ids: Iterable[int]) -> list[T]:
        return [fn(trial_id) for trial_id in trial_ids]

class ProcessExecutor(TrialExecutor):
    def __init__(self, workers: int):
        self.workers = workers

    def map(self, fn: Callable[[int], T], trial_ids: Iterable[int]) -> list[T]:
        ids = list(trial_ids)
        chunksize = max(1, len(ids) // (self.workers * 8))
        logger.debug(f"Dispatching {len(ids)} trials to {self.workers} workers (chunksize={chunksize})")
        with ProcessPoolExecutor(max_workers=self.workers) as pool:
            # map preserves input order, so results line up with trial ids
            return list(pool.map(fn, ids, chunksize=chunksize))

class ExecutorFactory:
    @staticmethod
    def create(workers: int) -> TrialExecutor:
        if workers < 1:
            raise ConfigurationError(f"Unsupported worker count: {workers}")
        if workers == 1:
            return SerialExecutor()
        available = os.cpu_count() or 1
        if workers > available:
            logger.warning(f"Requested {workers} workers but only {available} CPUs are available")
        return ProcessExecutor(workers)
