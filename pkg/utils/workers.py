"""
Ordered job pool for replications and folds
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime
from typing import Callable, Dict, List, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class JobPool:
    """
    Runs independent jobs, optionally on worker threads, and returns results
    in submission order so reductions never depend on scheduling
    """

    def __init__(self, name: str, workers: int = 1):
        """
        Initialize pool

        Args:
            name: Pool name for logging
            workers: Number of worker threads (1 runs inline)
        """
        self.name = name
        self.workers = max(1, int(workers))
        self.logger = logging.getLogger(f"{__name__}.{name}")
        self.stats: Dict[str, float] = {"jobs": 0, "seconds": 0.0}

    def _wrap_job(self, job_id: str, func: Callable[[T], R]) -> Callable[[T], R]:
        """Wrap job function with logging and timing"""
        def wrapped(item: T) -> R:
            self.logger.debug(f"Starting job: {job_id}")
            start_time = datetime.now()
            try:
                return func(item)
            finally:
                duration = (datetime.now() - start_time).total_seconds()
                self.logger.debug(f"Completed job: {job_id} in {duration:.2f}s")

        return wrapped

    def map(self, func: Callable[[T], R], items: Sequence[T]) -> List[R]:
        """
        Apply func to every item

        Args:
            func: Job function; exceptions propagate to the caller
            items: Job inputs

        Returns:
            Results in the order of items
        """
        jobs = [self._wrap_job(f"{self.name}[{i}]", func) for i in range(len(items))]
        start_time = datetime.now()

        if self.workers == 1 or len(items) <= 1:
            results = [job(item) for job, item in zip(jobs, items)]
        else:
            with ThreadPoolExecutor(max_workers=self.workers) as executor:
                futures = [executor.submit(job, item) for job, item in zip(jobs, items)]
                results = [future.result() for future in futures]

        self.stats["jobs"] += len(items)
        self.stats["seconds"] += (datetime.now() - start_time).total_seconds()
        self.logger.info(f"{self.name}: {len(items)} jobs on {self.workers} worker(s)")
        return results
