import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

THREADS_ENV = "REFLECTA_THREADS"


def resolve_threads(threads=None):
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(1, int(threads))


def index_rng(seed, index):
    """Generator for sample ``index`` of a run seeded with ``seed``.

    Depends only on the pair, so results do not depend on scheduling.
    """
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)])


def pmap(fn, items, threads=None):
    """Ordered map over ``items`` on up to ``threads`` worker threads."""
    items = list(items)
    threads = resolve_threads(threads)
    if threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
