"""Thread pool helper for independent oracle calls."""

from concurrent.futures import ThreadPoolExecutor

from SurfaceScope.config import worker_count


def parallel_map(fn, items, workers=None):
    """Apply ``fn`` to every item, keeping input order in the result."""
    items = list(items)
    workers = worker_count() if workers is None else max(1, int(workers))
    if workers == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
