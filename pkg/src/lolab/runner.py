"""Order-preserving parallel map capped by LOLAB_THREADS."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("LOLAB_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items, workers: int | None = None) -> list:
    """``[fn(x) for x in items]``; results keep input order, so output is deterministic."""
    items = list(items)
    workers = min(workers or thread_cap(), len(items) or 1)
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
