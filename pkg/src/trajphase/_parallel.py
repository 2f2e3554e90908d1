import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "HOLONOMY_THREADS"


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    return max(1, n)


def ordered_map(fn, items):
    """``list(map(fn, items))``, spread over ``HOLONOMY_THREADS`` workers.

    Results always come back in input order, so output never depends on the
    worker count.
    """
    items = list(items)
    n = worker_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * n))
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
