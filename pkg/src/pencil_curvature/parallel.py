"""Worker-count plumbing.  PENCIL_CURVATURE_THREADS caps the pool size."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_VAR = "PENCIL_CURVATURE_THREADS"


def worker_count() -> int:
    raw = os.environ.get(ENV_VAR)
    cpus = os.cpu_count() or 1
    if raw is None:
        return min(4, cpus)
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, min(n, cpus))


def pmap(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Order-preserving map; serial when only one worker is allowed."""
    items = list(items)
    n = worker_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
