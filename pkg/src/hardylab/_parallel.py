"""Optional thread fan-out for embarrassingly parallel grid sweeps.

HARDYLAB_THREADS caps the worker count; the default of 1 keeps every run
single-threaded.  Results always come back in input order, so enabling
threads never changes a certificate.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    raw = os.environ.get("HARDYLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Order-preserving map over items, threaded if HARDYLAB_THREADS > 1."""
    items = list(items)
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
