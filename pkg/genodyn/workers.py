# workers.py - Thread fan-out for independent work items
#
# Multistart Newton and basin grids hand a list of starts to map_parallel();
# each start runs on an anyio worker thread and results come back in input
# order, so the merge is deterministic whatever the scheduling.

from typing import Callable, List, Optional, Sequence, TypeVar

import anyio
from anyio import CapacityLimiter, to_thread

from .config import worker_count

T = TypeVar("T")
R = TypeVar("R")


async def _gather(fn: Callable[[T], R], items: Sequence[T], workers: int) -> List[R]:
    limiter = CapacityLimiter(workers)
    results: List[Optional[R]] = [None] * len(items)

    async def run_one(index: int, item: T) -> None:
        results[index] = await to_thread.run_sync(fn, item, limiter=limiter)

    async with anyio.create_task_group() as tg:
        for index, item in enumerate(items):
            tg.start_soon(run_one, index, item)
    return results


def map_parallel(fn: Callable[[T], R], items: Sequence[T], workers: Optional[int] = None) -> List[R]:
    """Apply fn to every item on up to `workers` threads; results keep item order.

    fn must not raise for expected failures (return a sentinel instead); an
    exception escaping fn cancels the remaining items.
    """
    items = list(items)
    if not items:
        return []
    workers = worker_count() if workers is None else max(1, int(workers))
    if workers == 1 or len(items) == 1:
        return [fn(item) for item in items]
    return anyio.run(_gather, fn, items, workers)
