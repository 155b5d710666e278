"""Ordered fan-out of independent work items over a thread pool."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


def chunked(items: Sequence[T], parts: int) -> List[Sequence[T]]:
    """Split ``items`` into at most ``parts`` contiguous slices."""
    parts = max(1, min(parts, len(items)))
    size, extra = divmod(len(items), parts)
    out = []
    start = 0
    for i in range(parts):
        stop = start + size + (1 if i < extra else 0)
        out.append(items[start:stop])
        start = stop
    return out


def ordered_map(fn: Callable[[T], R], work: Iterable[T], threads: int = 1) -> List[R]:
    """Apply ``fn`` to each item and return results in input order.

    With ``threads == 1`` no pool is created.
    """
    items = list(work)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logger.debug("dispatching %d work items to %d threads", len(items), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
