"""Order-preserving thread-pool map for per-frame work."""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

from tqdm import tqdm

from vbgdetect.config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(
    fn: Callable[[T], R],
    items: Sequence[T],
    workers: int | None = None,
    desc: str | None = None,
) -> list[R]:
    """``[fn(x) for x in items]`` on a thread pool; results keep input order.

    numpy, OpenCV and Pillow release the GIL in their inner loops, so threads
    give real speedups for filtering and feature extraction.
    """
    workers = settings.WORKERS if workers is None else workers
    show = desc is not None and len(items) > 1
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in tqdm(items, desc=desc, disable=not show, leave=False)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(tqdm(pool.map(fn, items), total=len(items), desc=desc, disable=not show, leave=False))
