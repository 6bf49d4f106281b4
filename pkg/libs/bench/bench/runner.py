"""Fan trial tasks out to worker processes and collect results in task order."""

from __future__ import annotations

import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import nullcontext
from typing import Callable, ContextManager, Iterator, List, Optional, Sequence, TypeVar, Union

from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class SweepRunner:
    """Runs module-level task functions serially or on a process pool.

    Results always come back in task order, so any reduction over them is
    independent of the worker count.
    """

    def __init__(self, workers: int = 1, show_progress: Optional[bool] = None):
        """Initialize the runner.

        Args:
            workers: Number of worker processes; 1 runs in-process.
            show_progress: Draw a progress bar on stderr. Defaults to whether
                stderr is a terminal.
        """
        if workers < 1:
            raise ValueError("workers must be at least 1")
        self.workers = workers
        self.show_progress = sys.stderr.isatty() if show_progress is None else show_progress

    def _progress(self) -> Union[Progress, ContextManager[None]]:
        if not self.show_progress:
            return nullcontext()
        return Progress(
            TextColumn("[bold]{task.description}"),
            BarColumn(),
            MofNCompleteColumn(),
            TimeElapsedColumn(),
            console=Console(stderr=True),
            transient=True,
        )

    def _iterate(self, fn: Callable[[T], R], tasks: Sequence[T]) -> Iterator[R]:
        if self.workers == 1 or len(tasks) <= 1:
            for task in tasks:
                yield fn(task)
            return
        workers = min(self.workers, len(tasks))
        logger.debug(f"Starting {workers} worker processes for {len(tasks)} tasks")
        with ProcessPoolExecutor(max_workers=workers) as pool:
            yield from pool.map(fn, tasks)

    def map(self, fn: Callable[[T], R], tasks: Sequence[T], description: str = "trials") -> List[R]:
        """Apply ``fn`` to every task and return the results in task order."""
        results: List[R] = []
        with self._progress() as progress:
            task_id = None
            if progress is not None:
                task_id = progress.add_task(description, total=len(tasks))
            for result in self._iterate(fn, tasks):
                results.append(result)
                if progress is not None and task_id is not None:
                    progress.advance(task_id)
        return results
